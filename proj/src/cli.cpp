#include "mwlab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mwlab/data.hpp"
#include "mwlab/encoder.hpp"
#include "mwlab/error.hpp"
#include "mwlab/experiments.hpp"
#include "mwlab/io.hpp"
#include "mwlab/kernels.hpp"
#include "mwlab/metrics.hpp"
#include "mwlab/scoring.hpp"
#include "mwlab/synthetic.hpp"
#include "mwlab/trainer.hpp"

namespace fs = std::filesystem;

namespace mwlab {

namespace {

struct DataArgs {
  std::string corpus;
  std::string queries;
  bool synthetic = false;
  std::uint64_t data_seed = SyntheticSpec{}.seed;
  std::size_t n_queries = SyntheticSpec{}.n_queries;
  std::size_t n_docs = SyntheticSpec{}.n_docs;

  void add_to(CLI::App* cmd, bool allow_synthetic) {
    cmd->add_option("--corpus", corpus, "Corpus JSONL");
    cmd->add_option("--queries", queries, "Query JSONL");
    if (allow_synthetic) {
      cmd->add_flag("--synthetic", synthetic, "Use the built-in synthetic benchmark");
      cmd->add_option("--data-seed", data_seed, "Seed of the synthetic benchmark");
      cmd->add_option("--n-queries", n_queries, "Synthetic query count");
      cmd->add_option("--n-docs", n_docs, "Synthetic document count");
    }
  }

  SyntheticData load() const {
    if (synthetic) {
      if (!corpus.empty() || !queries.empty()) {
        throw ValidationError("--synthetic cannot be combined with --corpus/--queries");
      }
      SyntheticSpec spec;
      spec.seed = data_seed;
      spec.n_queries = n_queries;
      spec.n_docs = n_docs;
      return make_synthetic(spec);
    }
    if (corpus.empty()) throw ValidationError("--corpus is required");
    if (queries.empty()) throw ValidationError("--queries is required");
    SyntheticData d{load_corpus(corpus), {}};
    d.queries = load_queries(queries, d.corpus);
    return d;
  }
};

struct ConfigArgs {
  std::string path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> loss;

  void add_to(CLI::App* cmd, bool with_loss) {
    cmd->add_option("--config", path, "Training config JSON");
    cmd->add_option("--seed", seed, "Seed (overrides the config)");
    if (with_loss) {
      cmd->add_option("--loss", loss, "Loss kind")->check(CLI::IsMember({"cl", "mw"}));
    }
  }

  TrainConfig load() const {
    TrainConfig c = path.empty() ? TrainConfig{} : load_train_config(path);
    if (seed) c.seed = *seed;
    if (loss) c.loss = parse_loss_kind(*loss);
    c.validate();
    return c;
  }
};

EncoderParams scorer_params(const std::string& checkpoint, const TrainConfig& config) {
  if (!checkpoint.empty()) return load_checkpoint(checkpoint);
  return init_params(config.encoder_config());
}

std::string roc_csv(const std::vector<RocPoint>& curve) {
  std::ostringstream out;
  out << "fpr,tpr\n";
  for (const auto& p : curve) out << format_number(p.fpr) << ',' << format_number(p.tpr) << '\n';
  return out.str();
}

std::string hist_csv(const Histogram& h) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,pos_count,neg_count\n";
  for (std::size_t b = 0; b < h.bins(); ++b) {
    out << format_number(h.edges[b]) << ',' << format_number(h.edges[b + 1]) << ','
        << h.pos_counts[b] << ',' << h.neg_counts[b] << '\n';
  }
  return out.str();
}

std::string pool_json(const ScorePool& pool, double tau) {
  nlohmann::ordered_json o;
  o["tau"] = tau;
  o["positives"] = pool.positives;
  o["negatives"] = pool.negatives;
  return o.dump();
}

void require_out(const std::string& out) {
  if (out.empty()) throw ValidationError("--out is required");
}

}  // namespace

int run_cli(int argc, char** argv) {
  kernels::configure_from_env();

  CLI::App app{"mwlab: dense retrieval training with Mann-Whitney and contrastive losses"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string out;
  std::string checkpoint;
  std::size_t top_k = 500;
  std::size_t bins = 50;

  // mine
  auto* mine = app.add_subcommand("mine", "Mine hard negatives with an encoder");
  DataArgs mine_data;
  ConfigArgs mine_cfg;
  mine_data.add_to(mine, false);
  mine_cfg.add_to(mine, false);
  mine->add_option("--checkpoint", checkpoint, "Encoder checkpoint (default: fresh init)");
  mine->add_option("--top-k,-k", top_k, "Negatives kept per query");
  mine->add_option("--out", out, "Output query JSONL");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train an encoder");
  DataArgs train_data;
  ConfigArgs train_cfg;
  std::string eval_queries;
  train_data.add_to(train_cmd, true);
  train_cfg.add_to(train_cmd, true);
  train_cmd->add_option("--eval-queries", eval_queries,
                        "Held-out queries (default: split --queries 80/10/10)");
  train_cmd->add_option("--out", out, "Run directory");

  // evaluate / roc / histogram
  DataArgs eval_data;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Pooled AUC and rank metrics");
  auto* roc_cmd = app.add_subcommand("roc", "ROC curve of the pooled scores");
  auto* hist_cmd = app.add_subcommand("histogram", "Histogram of pooled scores");
  for (auto* cmd : {evaluate_cmd, roc_cmd, hist_cmd}) {
    eval_data.add_to(cmd, false);
    cmd->add_option("--checkpoint", checkpoint, "Encoder checkpoint")->required();
    cmd->add_option("--top-k", top_k, "Pooled negatives per query");
    cmd->add_option("--out", out, "Output directory");
  }
  hist_cmd->add_option("--bins", bins, "Bin count")->check(CLI::PositiveNumber);

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "Train CL and MW side by side");
  DataArgs compare_data;
  ConfigArgs compare_cfg;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::size_t mine_k = CompareOptions{}.mine_k;
  compare_data.add_to(compare_cmd, true);
  compare_cmd->add_option("--config", compare_cfg.path, "Training config JSON");
  compare_cmd->add_option("--seeds", seeds, "Seeds")->expected(1, -1);
  compare_cmd->add_option("--mine-k", mine_k, "Mining depth when queries carry no negatives");
  compare_cmd->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
  compare_cmd->add_option("--out", out, "Output directory");

  // lemma1-demo
  auto* l1 = app.add_subcommand("lemma1-demo", "Per-query Gaussian offsets against AoC and CL");
  std::string pools_path;
  bool l1_synthetic = false;
  std::size_t l1_queries = 200;
  std::size_t l1_negatives = 10;
  std::vector<double> sigmas{0.0, 0.01, 0.1, 1.0, 10.0, 100.0, 1e6};
  double l1_tau = 1.0;
  std::uint64_t l1_seed = 0;
  l1->add_option("--pools", pools_path, "Per-query score pools JSONL");
  l1->add_flag("--synthetic", l1_synthetic, "Use generated pools with scores in [-1, 1]");
  l1->add_option("--n-queries", l1_queries, "Generated query count");
  l1->add_option("--negatives", l1_negatives, "Generated negatives per query");
  l1->add_option("--sigma", sigmas, "Offset standard deviations")->expected(1, -1);
  l1->add_option("--tau", l1_tau, "Temperature")->check(CLI::PositiveNumber);
  l1->add_option("--seed", l1_seed, "Seed");
  l1->add_option("--out", out, "Output CSV (default: stdout)");

  // lemma2-check
  auto* l2 = app.add_subcommand("lemma2-check", "Check AoC <= MW / log 2 on random pools");
  std::size_t trials = 1000;
  std::size_t max_size = 500;
  std::vector<double> taus{0.01, 0.1, 1.0};
  std::uint64_t l2_seed = 0;
  l2->add_option("--trials", trials, "Number of pools");
  l2->add_option("--max-size", max_size, "Largest pool side");
  l2->add_option("--tau", taus, "Temperatures")->expected(1, -1);
  l2->add_option("--seed", l2_seed, "Seed");
  l2->add_option("--out", out, "Where to dump a violating pool");

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "Grid over lr, batch size and hard negatives");
  DataArgs ablate_data;
  ConfigArgs ablate_cfg;
  std::vector<double> lrs;
  std::vector<std::size_t> batch_sizes;
  std::vector<std::size_t> hard_negs;
  std::size_t ablate_mine_k = CompareOptions{}.mine_k;
  ablate_data.add_to(ablate_cmd, true);
  ablate_cfg.add_to(ablate_cmd, true);
  ablate_cmd->add_option("--lr", lrs, "Learning rates")->expected(1, -1);
  ablate_cmd->add_option("--batch-size", batch_sizes, "Batch sizes")->expected(1, -1);
  ablate_cmd->add_option("--hard-negatives", hard_negs, "Hard negatives per query")->expected(1, -1);
  ablate_cmd->add_option("--mine-k", ablate_mine_k, "Mining depth when queries carry no negatives");
  ablate_cmd->add_option("--out", out, "Output CSV");

  // counts
  auto* counts_cmd = app.add_subcommand("counts", "Pairwise comparisons per batch for CL and MW");
  std::uint64_t count_b = 0;
  std::uint64_t count_h = 0;
  counts_cmd->add_option("--batch-size,-B", count_b, "Batch size")->required();
  counts_cmd->add_option("--hard-negatives,-H", count_h, "Hard negatives per query");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic benchmark as JSONL");
  DataArgs synth_data;
  synth_data.synthetic = true;
  synth_cmd->add_option("--data-seed", synth_data.data_seed, "Benchmark seed");
  synth_cmd->add_option("--n-queries", synth_data.n_queries, "Query count");
  synth_cmd->add_option("--n-docs", synth_data.n_docs, "Document count");
  synth_cmd->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (mine->parsed()) {
      require_out(out);
      const TrainConfig cfg = mine_cfg.load();
      const auto data = mine_data.load();
      const auto params = scorer_params(checkpoint, cfg);
      const auto mined =
          mine_hard_negatives(data.queries, data.corpus, encoder_scores(params, data.queries, data.corpus), top_k);
      write_queries(out, mined.queries);
      for (const auto& w : mined.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "mined " << mined.queries.size() << " queries, " << mined.warnings.size()
                << " warnings\n";
    } else if (train_cmd->parsed()) {
      require_out(out);
      const TrainConfig cfg = train_cfg.load();
      const auto data = train_data.load();
      QuerySplit split;
      if (!eval_queries.empty()) {
        split.train = data.queries;
        split.eval = load_queries(eval_queries, data.corpus);
      } else {
        split = split_queries(data.queries, {0.8, 0.1, cfg.seed});
      }
      const auto run = train(cfg, split.train, split.eval, data.corpus, {fs::path(out) / "checkpoints"});
      if (eval_queries.empty()) {
        write_queries(fs::path(out) / "split" / "train.jsonl", split.train);
        write_queries(fs::path(out) / "split" / "eval.jsonl", split.eval);
        write_queries(fs::path(out) / "split" / "test.jsonl", split.test);
      }
      write_run_report(out, run.report);
      write_text(fs::path(out) / "config.json", to_json(cfg));
      save_checkpoint(fs::path(out) / "best.ckpt", run.best, run.report.best_checkpoint_step);
      std::cout << to_string(cfg.loss) << ": " << run.report.steps_run << " steps, best step "
                << run.report.best_checkpoint_step << ", best eval loss "
                << format_number(run.report.best_eval_loss) << ", "
                << format_number(run.report.wall_time_seconds) << " s\n";
    } else if (evaluate_cmd->parsed() || roc_cmd->parsed() || hist_cmd->parsed()) {
      require_out(out);
      const auto data = eval_data.load();
      const auto params = load_checkpoint(checkpoint);
      const auto m = evaluate(params, data.queries, data.corpus, top_k);
      if (evaluate_cmd->parsed()) {
        write_text(fs::path(out) / "metrics.json", metrics_json(m));
        std::cout << "auc " << format_number(m.auc) << " mrr@10 " << format_number(m.mrr10)
                  << " ndcg@10 " << format_number(m.ndcg10) << '\n';
      } else if (roc_cmd->parsed()) {
        write_text(fs::path(out) / "roc.csv", roc_csv(roc_curve(m.pool)));
      } else {
        write_text(fs::path(out) / "hist.csv", hist_csv(histogram(m.pool, bins)));
      }
    } else if (compare_cmd->parsed()) {
      require_out(out);
      if (seeds.empty()) throw ValidationError("compare needs at least one seed");
      CompareOptions opts;
      opts.base = compare_cfg.load();
      opts.seeds = seeds;
      opts.mine_k = mine_k;
      opts.hist_bins = bins;
      opts.out_dir = out;
      const auto data = compare_data.load();
      const auto result = run_compare(data.corpus, data.queries, opts);
      write_text(fs::path(out) / "compare.json", compare_json(result));
      for (const auto& r : result.seeds) {
        std::cout << "seed " << r.seed << ": auc cl " << format_number(r.cl.auc) << " mw "
                  << format_number(r.mw.auc) << " gain " << format_number(r.auc_gain) << '\n';
      }
      std::cout << "mean auc gain " << format_number(result.mean_auc_gain) << '\n';
    } else if (l1->parsed()) {
      if (l1_synthetic == !pools_path.empty()) {
        throw ValidationError("lemma1-demo needs exactly one of --pools or --synthetic");
      }
      const auto pools = l1_synthetic ? synthetic_query_pools(l1_queries, l1_negatives, l1_seed)
                                      : load_query_pools(pools_path);
      const auto csv = lemma1_csv(pools, sigmas, l1_tau, l1_seed);
      if (out.empty()) std::cout << csv;
      else write_text(out, csv);
    } else if (l2->parsed()) {
      const auto s = run_lemma2_check(trials, max_size, taus, l2_seed);
      std::cout << "trials " << s.trials << " violations " << s.violations << " max aoc/bound "
                << format_number(s.max_ratio) << '\n';
      if (s.violating_pool) {
        const auto dump = pool_json(*s.violating_pool, s.violating_tau);
        std::cerr << "violating pool: " << dump << '\n';
        if (!out.empty()) write_text(out, dump + "\n");
        return 1;
      }
    } else if (ablate_cmd->parsed()) {
      require_out(out);
      TrainConfig base = ablate_cfg.load();
      AblationGrid grid{lrs, batch_sizes, hard_negs};
      if (grid.learning_rates.empty()) grid.learning_rates = {base.base_lr};
      if (grid.batch_sizes.empty()) grid.batch_sizes = {base.batch_size};
      if (grid.hard_negatives.empty()) grid.hard_negatives = {base.hard_negatives};
      for (double lr : grid.learning_rates) {
        if (!(lr > 0.0)) throw ValidationError("--lr values must be positive");
      }
      auto data = ablate_data.load();
      bool has_negs = false;
      for (const auto& q : data.queries) has_negs = has_negs || !q.hard_negative_ids.empty();
      if (!has_negs) {
        data.queries = mine_hard_negatives(data.queries, data.corpus,
                                           encoder_scores(init_params(base.encoder_config()),
                                                          data.queries, data.corpus),
                                           ablate_mine_k)
                           .queries;
      }
      const auto split = split_queries(data.queries, {0.8, 0.1, base.seed});
      const auto rows = ablation_sweep(grid, base, split.train, split.eval, split.test, data.corpus);
      write_text(out, ablation_csv(rows));
    } else if (counts_cmd->parsed()) {
      const auto c = comparison_counts(count_b, count_h);
      std::cout << "cl_terms " << c.cl_terms << " mw_terms " << c.mw_terms << '\n';
    } else if (synth_cmd->parsed()) {
      require_out(out);
      const auto data = synth_data.load();
      write_corpus(fs::path(out) / "corpus.jsonl", data.corpus);
      write_queries(fs::path(out) / "queries.jsonl", data.queries);
      std::cout << data.corpus.size() << " documents, " << data.queries.size() << " queries\n";
    }
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace mwlab
