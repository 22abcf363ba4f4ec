#include "mwlab/experiments.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "mwlab/error.hpp"
#include "mwlab/io.hpp"
#include "mwlab/objectives.hpp"
#include "mwlab/rng.hpp"

namespace mwlab {

namespace {

bool has_hard_negatives(const QuerySet& queries) {
  for (const auto& q : queries) {
    if (!q.hard_negative_ids.empty()) return true;
  }
  return false;
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,pos_count,neg_count\n";
  for (std::size_t b = 0; b < h.bins(); ++b) {
    out << format_number(h.edges[b]) << ',' << format_number(h.edges[b + 1]) << ','
        << h.pos_counts[b] << ',' << h.neg_counts[b] << '\n';
  }
  return out.str();
}

nlohmann::ordered_json summary_json(const LossSummary& s) {
  nlohmann::ordered_json o;
  o["auc"] = s.auc;
  o["mrr_at_10"] = s.mrr10;
  o["ndcg_at_10"] = s.ndcg10;
  o["overlap"] = s.overlap;
  o["best_checkpoint_step"] = s.best_checkpoint_step;
  return o;
}

void accumulate(LossSummary& acc, const LossSummary& s, double w) {
  acc.auc += w * s.auc;
  acc.mrr10 += w * s.mrr10;
  acc.ndcg10 += w * s.ndcg10;
  acc.overlap += w * s.overlap;
  acc.best_checkpoint_step += w * s.best_checkpoint_step;
}

}  // namespace

CompareResult run_compare(const Corpus& corpus, const QuerySet& queries, const CompareOptions& options) {
  if (options.seeds.empty()) throw ValidationError("compare needs at least one seed");
  options.base.validate();
  CompareResult result;
  const bool mine = options.base.hard_negatives > 0 && !has_hard_negatives(queries);

  for (std::uint64_t seed : options.seeds) {
    TrainConfig cfg = options.base;
    cfg.seed = seed;
    QuerySet data = queries;
    if (mine) {
      const auto init = init_params(cfg.encoder_config());
      data = mine_hard_negatives(queries, corpus, encoder_scores(init, queries, corpus), options.mine_k)
                 .queries;
    }
    const auto split = split_queries(data, {options.train_fraction, options.eval_fraction, seed});

    SeedComparison row;
    row.seed = seed;
    for (LossKind kind : {LossKind::cl, LossKind::mw}) {
      cfg.loss = kind;
      const auto run = train(cfg, split.train, split.eval, corpus);
      const auto m = evaluate(run.best, split.test, corpus, cfg.eval_top_k);
      const auto hist = histogram(m.pool, options.hist_bins);
      LossSummary s{m.auc, m.mrr10, m.ndcg10, overlap_coefficient(hist),
                    static_cast<double>(run.report.best_checkpoint_step)};
      if (options.out_dir) {
        const auto dir = *options.out_dir / ("seed_" + std::to_string(seed)) / to_string(kind);
        write_run_report(dir, run.report);
        write_text(dir / "metrics.json", metrics_json(m));
        write_text(dir / "hist.csv", histogram_csv(hist));
      }
      (kind == LossKind::cl ? row.cl : row.mw) = s;
    }
    row.auc_gain = row.mw.auc - row.cl.auc;
    row.mrr_gain = row.mw.mrr10 - row.cl.mrr10;
    row.ndcg_gain = row.mw.ndcg10 - row.cl.ndcg10;
    result.mw_lower_overlap_seeds += row.mw.overlap < row.cl.overlap;
    result.mw_later_best_step_seeds += row.mw.best_checkpoint_step >= row.cl.best_checkpoint_step;
    result.seeds.push_back(row);
  }

  const double w = 1.0 / static_cast<double>(result.seeds.size());
  for (const auto& r : result.seeds) {
    accumulate(result.mean_cl, r.cl, w);
    accumulate(result.mean_mw, r.mw, w);
    result.mean_auc_gain += w * r.auc_gain;
    result.mean_mrr_gain += w * r.mrr_gain;
    result.mean_ndcg_gain += w * r.ndcg_gain;
  }
  return result;
}

std::string compare_json(const CompareResult& result) {
  nlohmann::ordered_json root;
  auto seeds = nlohmann::ordered_json::array();
  for (const auto& r : result.seeds) {
    nlohmann::ordered_json o;
    o["seed"] = r.seed;
    o["cl"] = summary_json(r.cl);
    o["mw"] = summary_json(r.mw);
    o["auc_gain"] = r.auc_gain;
    o["mrr_gain"] = r.mrr_gain;
    o["ndcg_gain"] = r.ndcg_gain;
    seeds.push_back(std::move(o));
  }
  root["seeds"] = std::move(seeds);
  nlohmann::ordered_json mean;
  mean["cl"] = summary_json(result.mean_cl);
  mean["mw"] = summary_json(result.mean_mw);
  mean["auc_gain"] = result.mean_auc_gain;
  mean["mrr_gain"] = result.mean_mrr_gain;
  mean["ndcg_gain"] = result.mean_ndcg_gain;
  root["mean"] = std::move(mean);
  root["mw_lower_overlap_seeds"] = result.mw_lower_overlap_seeds;
  root["mw_later_best_step_seeds"] = result.mw_later_best_step_seeds;
  return root.dump(2) + "\n";
}

std::vector<ScorePool> load_query_pools(const std::filesystem::path& path) {
  std::vector<ScorePool> pools;
  const auto lines = read_lines(path);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].find_first_not_of(" \t") == std::string::npos) continue;
    const std::string ctx = path.string() + ":" + std::to_string(n + 1) + ": ";
    try {
      const auto obj = nlohmann::json::parse(lines[n]);
      ScorePool p;
      p.positives = obj.at("positives").get<std::vector<double>>();
      p.negatives = obj.at("negatives").get<std::vector<double>>();
      pools.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(ctx + e.what());
    }
  }
  if (pools.empty()) throw ValidationError(path.string() + ": no query pools");
  return pools;
}

std::vector<ScorePool> synthetic_query_pools(std::size_t queries, std::size_t negatives,
                                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ScorePool> pools(queries);
  for (auto& p : pools) {
    p.positives.push_back(rng.uniform(0.2, 1.0));
    for (std::size_t k = 0; k < negatives; ++k) p.negatives.push_back(rng.uniform(-1.0, 0.6));
  }
  return pools;
}

std::string lemma1_csv(std::span<const ScorePool> pools, std::span<const double> sigmas,
                       double tau, std::uint64_t seed) {
  std::ostringstream out;
  out << "sigma,aoc_before,aoc_after,cl_before,cl_after\n";
  for (std::size_t r = 0; r < sigmas.size(); ++r) {
    Rng rng(derive_seed(seed, r));
    const auto d = gaussian_degradation_demo(pools, sigmas[r], tau, rng);
    out << format_number(sigmas[r]) << ',' << format_number(d.aoc_before) << ','
        << format_number(d.aoc_after) << ',' << format_number(d.cl_before) << ','
        << format_number(d.cl_after) << '\n';
  }
  return out.str();
}

Lemma2Summary run_lemma2_check(std::size_t trials, std::size_t max_size,
                               std::span<const double> taus, std::uint64_t seed) {
  if (trials == 0) throw ValidationError("lemma2 check needs trials >= 1");
  if (max_size == 0) throw ValidationError("lemma2 check needs max_size >= 1");
  if (taus.empty()) throw ValidationError("lemma2 check needs at least one tau");
  Rng rng(seed);
  Lemma2Summary s;
  for (std::size_t t = 0; t < trials; ++t) {
    const double tau = taus[t % taus.size()];
    const double spread = tau * std::pow(10.0, rng.uniform(-1.0, 2.0));
    const double shift = rng.uniform(-2.0, 2.0) * spread;
    const bool snap = rng.below(4) == 0;
    ScorePool pool;
    const std::size_t np = 1 + rng.below(max_size);
    const std::size_t nn = 1 + rng.below(max_size);
    auto draw = [&](double mean) {
      double v = mean + spread * rng.normal();
      if (snap) v = std::round(v / spread) * spread;
      return v;
    };
    for (std::size_t i = 0; i < np; ++i) pool.positives.push_back(draw(shift));
    for (std::size_t i = 0; i < nn; ++i) pool.negatives.push_back(draw(0.0));

    const auto c = mw_bound_check(pool, tau);
    ++s.trials;
    if (c.mw_population > 0.0) {
      s.max_ratio = std::max(s.max_ratio, c.aoc / (c.mw_population / std::log(2.0)));
    }
    if (!c.holds) {
      ++s.violations;
      if (!s.violating_pool) {
        s.violating_pool = pool;
        s.violating_tau = tau;
      }
    }
  }
  return s;
}

}  // namespace mwlab
