#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mwlab/data.hpp"
#include "mwlab/metrics.hpp"
#include "mwlab/trainer.hpp"

namespace mwlab {

struct CompareOptions {
  TrainConfig base;
  std::vector<std::uint64_t> seeds;
  // Depth of the hard-negative lists mined (with the seed's freshly
  // initialized encoder) when the queries carry none.
  std::size_t mine_k = 20;
  double train_fraction = 0.8;
  double eval_fraction = 0.1;
  std::size_t hist_bins = 50;
  // When set, per-seed run reports and histograms go under
  // <out_dir>/seed_<s>/<loss>/.
  std::optional<std::filesystem::path> out_dir;
};

struct LossSummary {
  double auc = 0.0;
  double mrr10 = 0.0;
  double ndcg10 = 0.0;
  double overlap = 0.0;  // histogram overlap coefficient of the test pool
  double best_checkpoint_step = 0.0;
};

struct SeedComparison {
  std::uint64_t seed = 0;
  LossSummary cl;
  LossSummary mw;
  double auc_gain = 0.0;  // mw - cl
  double mrr_gain = 0.0;
  double ndcg_gain = 0.0;
};

struct CompareResult {
  std::vector<SeedComparison> seeds;
  LossSummary mean_cl;
  LossSummary mean_mw;
  double mean_auc_gain = 0.0;
  double mean_mrr_gain = 0.0;
  double mean_ndcg_gain = 0.0;
  std::size_t mw_lower_overlap_seeds = 0;
  std::size_t mw_later_best_step_seeds = 0;
};

/// Per seed: mine hard negatives if needed, split queries, train CL and MW
/// from the same initialization and batch stream, evaluate both on the test
/// split with the pooled protocol.
CompareResult run_compare(const Corpus& corpus, const QuerySet& queries, const CompareOptions& options);
std::string compare_json(const CompareResult& result);

// JSONL, one {"positives": [...], "negatives": [...]} object per query.
std::vector<ScorePool> load_query_pools(const std::filesystem::path& path);

// Scores bounded by 1: one positive ~ U(0.2, 1) and `negatives` draws of
// U(-1, 0.6) per query.
std::vector<ScorePool> synthetic_query_pools(std::size_t queries, std::size_t negatives,
                                             std::uint64_t seed);

// Header sigma,aoc_before,aoc_after,cl_before,cl_after. Row r draws its
// offsets from Rng(derive_seed(seed, r)).
std::string lemma1_csv(std::span<const ScorePool> pools, std::span<const double> sigmas,
                       double tau, std::uint64_t seed);

struct Lemma2Summary {
  std::size_t trials = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;  // max of aoc / (mw / log 2) over trials with mw > 0
  std::optional<ScorePool> violating_pool;
  double violating_tau = 0.0;
};

/// Random pools with 1..max_size scores per side, cycling through `taus`.
/// Score spreads range over 0.1..100 temperatures and a quarter of the pools
/// are snapped to a coarse grid to force ties.
Lemma2Summary run_lemma2_check(std::size_t trials, std::size_t max_size,
                               std::span<const double> taus, std::uint64_t seed);

}  // namespace mwlab
