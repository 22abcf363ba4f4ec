#include "mwlab/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mwlab/error.hpp"
#include "mwlab/io.hpp"
#include "mwlab/kernels.hpp"
#include "mwlab/rng.hpp"
#include "mwlab/scoring.hpp"

namespace mwlab {

using nlohmann::json;

namespace {
// Stream tags for derive_seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kBatchStream = 2;
constexpr std::uint64_t kEvalStream = 3;
}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 2) throw ValidationError("batch_size must be >= 2");
  if (!(tau > 0.0)) throw ValidationError("tau must be > 0");
  if (!(base_lr > 0.0)) throw ValidationError("base_lr must be > 0");
  if (eval_every == 0) throw ValidationError("eval_every must be >= 1");
  if (patience == 0) throw ValidationError("patience must be >= 1");
  if (eval_batches == 0) throw ValidationError("eval_batches must be >= 1");
  if (eval_top_k == 0) throw ValidationError("eval_top_k must be >= 1");
  encoder_config().validate();
}

EncoderConfig TrainConfig::encoder_config() const {
  return {hash_dim, embed_dim, proj_dim, derive_seed(seed, kInitStream)};
}

TrainConfig parse_train_config(std::string_view json_text) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed config JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ValidationError("config must be a JSON object");
  TrainConfig c;
  for (const auto& [key, value] : obj.items()) {
    try {
      if (key == "loss" || key == "loss_kind") c.loss = parse_loss_kind(value.get<std::string>());
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "hard_negatives") c.hard_negatives = value.get<std::size_t>();
      else if (key == "tau") c.tau = value.get<double>();
      else if (key == "base_lr") c.base_lr = value.get<double>();
      else if (key == "warmup_steps") c.warmup_steps = value.get<std::size_t>();
      else if (key == "max_epochs") c.max_epochs = value.get<std::size_t>();
      else if (key == "patience") c.patience = value.get<std::size_t>();
      else if (key == "eval_every") c.eval_every = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "max_steps") c.max_steps = value.get<std::size_t>();
      else if (key == "eval_batches") c.eval_batches = value.get<std::size_t>();
      else if (key == "eval_top_k") c.eval_top_k = value.get<std::size_t>();
      else if (key == "hash_dim") c.hash_dim = value.get<std::size_t>();
      else if (key == "embed_dim") c.embed_dim = value.get<std::size_t>();
      else if (key == "proj_dim") c.proj_dim = value.get<std::size_t>();
      else throw ValidationError("unknown config key '" + key + "'");
    } catch (const json::exception& e) {
      throw ValidationError("bad value for config key '" + key + "': " + e.what());
    }
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::string text;
  for (const auto& line : read_lines(path)) text += line + "\n";
  return parse_train_config(text);
}

std::string to_json(const TrainConfig& c) {
  nlohmann::ordered_json obj;
  obj["loss"] = to_string(c.loss);
  obj["batch_size"] = c.batch_size;
  obj["hard_negatives"] = c.hard_negatives;
  obj["tau"] = c.tau;
  obj["base_lr"] = c.base_lr;
  obj["warmup_steps"] = c.warmup_steps;
  obj["max_epochs"] = c.max_epochs;
  obj["patience"] = c.patience;
  obj["eval_every"] = c.eval_every;
  obj["seed"] = c.seed;
  obj["max_steps"] = c.max_steps;
  obj["eval_batches"] = c.eval_batches;
  obj["eval_top_k"] = c.eval_top_k;
  obj["hash_dim"] = c.hash_dim;
  obj["embed_dim"] = c.embed_dim;
  obj["proj_dim"] = c.proj_dim;
  return obj.dump(2);
}

double lr_at(std::size_t step, const TrainConfig& config) {
  if (config.warmup_steps == 0) return config.base_lr;
  const double frac = static_cast<double>(step) / static_cast<double>(config.warmup_steps);
  return config.base_lr * std::min(1.0, frac);
}

OptimizerState OptimizerState::for_params(const EncoderParams& params) {
  return {ParamGrads::zeros_like(params), ParamGrads::zeros_like(params), 0};
}

void adam_step(EncoderParams& params, const ParamGrads& grads, OptimizerState& state, double lr) {
  if (!grads.all_finite()) throw NumericError("non-finite gradient at optimizer step " +
                                              std::to_string(state.step + 1));
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(OptimizerState::beta1, t);
  const double c2 = 1.0 - std::pow(OptimizerState::beta2, t);
  auto update = [&](Matrix& p, const Matrix& g, Matrix& m, Matrix& v) {
    auto pv = p.values();
    auto gv = g.values();
    auto mv = m.values();
    auto vv = v.values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = OptimizerState::beta1 * mv[i] + (1.0 - OptimizerState::beta1) * gv[i];
      vv[i] = OptimizerState::beta2 * vv[i] + (1.0 - OptimizerState::beta2) * gv[i] * gv[i];
      const double mhat = mv[i] / c1;
      const double vhat = vv[i] / c2;
      pv[i] -= lr * mhat / (std::sqrt(vhat) + OptimizerState::eps);
    }
  };
  update(params.embedding, grads.embedding, state.m.embedding, state.v.embedding);
  update(params.projection, grads.projection, state.m.projection, state.v.projection);
}

Matrix encoder_scores(const EncoderParams& params, const QuerySet& queries, const Corpus& corpus) {
  std::vector<std::string> qtexts;
  qtexts.reserve(queries.size());
  for (const auto& q : queries) qtexts.push_back(q.text);
  std::vector<std::string> dtexts;
  dtexts.reserve(corpus.size());
  for (const auto& d : corpus.documents()) dtexts.push_back(d.text);
  const auto qe = encode_forward(params, qtexts);
  const auto de = encode_forward(params, dtexts);
  return kernels::similarity(qe.vectors, de.vectors);
}

namespace {

EvalMetrics evaluate_scores(const Matrix& scores, const QuerySet& queries, const Corpus& corpus,
                            std::size_t top_k) {
  EvalMetrics m;
  auto [pool, auc_value] = pooled_auc_protocol(queries, corpus, scores, top_k);
  m.auc = auc_value;
  m.aoc = 1.0 - auc_value;
  m.n_pos = pool.positives.size();
  m.n_neg = pool.negatives.size();
  m.pool = std::move(pool);
  const auto lists = rank_corpus(queries, corpus, scores, 10);
  m.mrr10 = mrr_at_k(lists, 10);
  m.ndcg10 = ndcg_at_k(lists, 10);
  m.precision10 = precision_at_k(lists, 10);
  m.recall1 = recall_at_k(lists, 1);
  return m;
}

}  // namespace

EvalMetrics evaluate(const EncoderParams& params, const QuerySet& queries, const Corpus& corpus,
                     std::size_t top_k) {
  return evaluate_scores(encoder_scores(params, queries, corpus), queries, corpus, top_k);
}

std::string metrics_json(const EvalMetrics& m) {
  nlohmann::ordered_json obj;
  obj["auc"] = m.auc;
  obj["aoc"] = m.aoc;
  obj["mrr_at_10"] = m.mrr10;
  obj["ndcg_at_10"] = m.ndcg10;
  obj["n_pos"] = m.n_pos;
  obj["n_neg"] = m.n_neg;
  return obj.dump(2) + "\n";
}

namespace {

// Tokenized texts, built once per run.
struct TextCache {
  std::vector<TokenBag> docs;
  std::vector<TokenBag> queries;
};

TextCache tokenize_all(const QuerySet& queries, const Corpus& corpus, std::size_t hash_dim) {
  TextCache c;
  c.docs.reserve(corpus.size());
  for (const auto& d : corpus.documents()) c.docs.push_back(tokenize_hash(d.text, hash_dim));
  c.queries.reserve(queries.size());
  for (const auto& q : queries) c.queries.push_back(tokenize_hash(q.text, hash_dim));
  return c;
}

struct BatchPass {
  EmbeddingBatch emb;
  Matrix q_emb;
  Matrix p_emb;
  LossOutput loss;
};

BatchPass run_batch(const EncoderParams& params, const TrainingBatch& batch, const TextCache& text,
                    const TrainConfig& config) {
  const std::size_t b = batch.size();
  const auto cols = batch.passage_columns();
  std::vector<TokenBag> bags;
  bags.reserve(b + cols.size());
  for (std::size_t q : batch.queries) bags.push_back(text.queries[q]);
  for (std::size_t p : cols) bags.push_back(text.docs[p]);

  BatchPass pass;
  pass.emb = encode_forward(params, std::move(bags));
  const std::size_t d = pass.emb.vectors.cols();
  pass.q_emb = Matrix(b, d);
  pass.p_emb = Matrix(cols.size(), d);
  for (std::size_t r = 0; r < b; ++r) std::ranges::copy(pass.emb.vectors.row(r), pass.q_emb.row(r).begin());
  for (std::size_t r = 0; r < cols.size(); ++r) {
    std::ranges::copy(pass.emb.vectors.row(b + r), pass.p_emb.row(r).begin());
  }
  const ScoreBatch scores = score_batch(pass.q_emb, pass.p_emb, config.tau);
  pass.loss = compute_loss(config.loss, scores);
  if (!std::isfinite(pass.loss.value)) throw NumericError("non-finite loss");
  return pass;
}

void backward(const BatchPass& pass, const EncoderParams& params, ParamGrads& grads) {
  const auto [d_q, d_p] = backprop_scores(pass.loss.grad, pass.q_emb, pass.p_emb);
  Matrix upstream(pass.emb.size(), d_q.cols());
  for (std::size_t r = 0; r < d_q.rows(); ++r) std::ranges::copy(d_q.row(r), upstream.row(r).begin());
  for (std::size_t r = 0; r < d_p.rows(); ++r) {
    std::ranges::copy(d_p.row(r), upstream.row(d_q.rows() + r).begin());
  }
  encode_backward(pass.emb, upstream, params, grads);
}

std::size_t eligible_count(std::span<const QueryRefs> refs, std::size_t h) {
  return static_cast<std::size_t>(std::ranges::count_if(
      refs, [h](const QueryRefs& r) { return !r.positives.empty() && r.hard_negatives.size() >= h; }));
}

}  // namespace

TrainResult train(const TrainConfig& config, const QuerySet& train_queries,
                  const QuerySet& eval_queries, const Corpus& corpus, const TrainOptions& options) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();

  const auto train_refs = resolve(train_queries, corpus);
  const auto eval_refs = resolve(eval_queries, corpus);
  const std::size_t n_train = eligible_count(train_refs, config.hard_negatives);
  const std::size_t n_eval = eligible_count(eval_refs, config.hard_negatives);
  if (config.max_epochs > 0 && n_train < config.batch_size) {
    throw ValidationError("training set has " + std::to_string(n_train) +
                          " eligible queries, fewer than batch_size");
  }
  if (n_eval < 2) throw ValidationError("eval set needs at least 2 eligible queries");

  TextCache train_text = tokenize_all(train_queries, corpus, config.hash_dim);
  TextCache eval_text{train_text.docs, {}};
  for (const auto& q : eval_queries) eval_text.queries.push_back(tokenize_hash(q.text, config.hash_dim));

  // Fixed held-out batches for the eval loss.
  const std::size_t eval_b = std::min(config.batch_size, n_eval);
  Rng eval_rng(derive_seed(config.seed, kEvalStream));
  std::vector<TrainingBatch> eval_set;
  for (std::size_t i = 0; i < config.eval_batches; ++i) {
    eval_set.push_back(sample_batch(eval_refs, eval_b, config.hard_negatives, eval_rng));
  }

  EncoderParams params = init_params(config.encoder_config());
  OptimizerState opt = OptimizerState::for_params(params);
  ParamGrads grads = ParamGrads::zeros_like(params);
  Rng batch_rng(derive_seed(config.seed, kBatchStream));

  const std::size_t steps_per_epoch = std::max<std::size_t>(1, n_train / config.batch_size);
  std::size_t total_steps = config.max_epochs * steps_per_epoch;
  if (config.max_steps > 0) total_steps = std::min(total_steps, config.max_steps);

  TrainResult result{params, {}};
  RunReport& report = result.report;
  report.loss = config.loss;
  report.best_eval_loss = std::numeric_limits<double>::infinity();
  std::size_t bad_rounds = 0;

  auto run_eval = [&](std::size_t step) {
    double loss_sum = 0.0;
    for (const auto& b : eval_set) loss_sum += run_batch(params, b, eval_text, config).loss.value;
    const double eval_loss = loss_sum / static_cast<double>(eval_set.size());
    const EvalMetrics m = evaluate(params, eval_queries, corpus, config.eval_top_k);
    report.evals.push_back({step, eval_loss, m.auc, m.mrr10, m.ndcg10});
    if (eval_loss < report.best_eval_loss) {
      report.best_eval_loss = eval_loss;
      report.best_checkpoint_step = step;
      result.best = params;
      bad_rounds = 0;
      if (options.checkpoint_dir) {
        save_checkpoint(*options.checkpoint_dir / ("ckpt_" + std::to_string(step)), params, step);
      }
    } else {
      ++bad_rounds;
    }
  };

  run_eval(0);
  for (std::size_t step = 1; step <= total_steps; ++step) {
    const TrainingBatch batch =
        sample_batch(train_refs, config.batch_size, config.hard_negatives, batch_rng);
    const BatchPass pass = run_batch(params, batch, train_text, config);
    grads.zero();
    backward(pass, params, grads);
    const double lr = lr_at(step, config);
    adam_step(params, grads, opt, lr);
    report.steps.push_back({step, pass.loss.value, lr});
    report.steps_run = step;

    if (step % config.eval_every == 0 || step == total_steps) {
      run_eval(step);
      if (bad_rounds >= config.patience && step < total_steps) {
        report.stopped_early = true;
        break;
      }
    }
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

void write_run_report(const std::filesystem::path& dir, const RunReport& report) {
  nlohmann::ordered_json obj;
  obj["loss"] = to_string(report.loss);
  obj["steps_run"] = report.steps_run;
  obj["best_checkpoint_step"] = report.best_checkpoint_step;
  obj["best_eval_loss"] = report.best_eval_loss;
  obj["stopped_early"] = report.stopped_early;
  auto evals = nlohmann::ordered_json::array();
  for (const auto& e : report.evals) {
    nlohmann::ordered_json r;
    r["step"] = e.step;
    r["eval_loss"] = e.eval_loss;
    r["auc"] = e.auc;
    r["mrr10"] = e.mrr10;
    r["ndcg10"] = e.ndcg10;
    evals.push_back(std::move(r));
  }
  obj["evals"] = std::move(evals);
  write_text(dir / "report.json", obj.dump(2) + "\n");

  std::ostringstream steps;
  steps << "step,train_loss,lr\n";
  for (const auto& s : report.steps) {
    steps << s.step << ',' << format_number(s.train_loss) << ',' << format_number(s.lr) << '\n';
  }
  write_text(dir / "steps.csv", steps.str());

  std::ostringstream evs;
  evs << "step,eval_loss,auc,mrr10,ndcg10\n";
  for (const auto& e : report.evals) {
    evs << e.step << ',' << format_number(e.eval_loss) << ',' << format_number(e.auc) << ','
        << format_number(e.mrr10) << ',' << format_number(e.ndcg10) << '\n';
  }
  write_text(dir / "evals.csv", evs.str());
}

std::vector<AblationRow> ablation_sweep(const AblationGrid& grid, const TrainConfig& base,
                                        const QuerySet& train_queries, const QuerySet& eval_queries,
                                        const QuerySet& test_queries, const Corpus& corpus) {
  if (grid.learning_rates.empty() || grid.batch_sizes.empty() || grid.hard_negatives.empty()) {
    throw ValidationError("ablation grid must be non-empty on every axis");
  }
  std::vector<AblationRow> rows;
  for (double lr : grid.learning_rates) {
    for (std::size_t b : grid.batch_sizes) {
      for (std::size_t h : grid.hard_negatives) {
        TrainConfig cfg = base;
        cfg.base_lr = lr;
        cfg.batch_size = b;
        cfg.hard_negatives = h;
        const auto run = train(cfg, train_queries, eval_queries, corpus);
        const auto m = evaluate(run.best, test_queries, corpus, cfg.eval_top_k);
        rows.push_back({lr, b, h, m.precision10, m.recall1, m.mrr10, m.ndcg10, m.auc});
      }
    }
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "lr,batch_size,hard_negative,precision@10,recall@1,MRR,nDCG@10,AUC\n";
  for (const auto& r : rows) {
    out << format_number(r.lr) << ',' << r.batch_size << ',' << r.hard_negatives << ','
        << format_number(r.precision10) << ',' << format_number(r.recall1) << ','
        << format_number(r.mrr) << ',' << format_number(r.ndcg10) << ',' << format_number(r.auc)
        << '\n';
  }
  return out.str();
}

}  // namespace mwlab
