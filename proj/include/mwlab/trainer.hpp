#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mwlab/data.hpp"
#include "mwlab/encoder.hpp"
#include "mwlab/metrics.hpp"
#include "mwlab/objectives.hpp"

namespace mwlab {

struct TrainConfig {
  LossKind loss = LossKind::mw;
  std::size_t batch_size = 32;
  std::size_t hard_negatives = 5;
  double tau = 0.01;
  double base_lr = 3e-5;
  std::size_t warmup_steps = 500;
  std::size_t max_epochs = 20;
  std::size_t patience = 3;
  std::size_t eval_every = 500;
  std::uint64_t seed = 0;
  // Extra knobs: hard cap on optimizer steps (0 = none), number of fixed
  // held-out batches for the eval loss, and the pooled-AUC negative depth.
  std::size_t max_steps = 0;
  std::size_t eval_batches = 4;
  std::size_t eval_top_k = 500;
  std::size_t hash_dim = std::size_t{1} << 15;
  std::size_t embed_dim = 64;
  std::size_t proj_dim = 32;

  void validate() const;
  EncoderConfig encoder_config() const;
};

// Flat JSON object; unknown keys and an unknown loss name are rejected.
TrainConfig parse_train_config(std::string_view json_text);
TrainConfig load_train_config(const std::filesystem::path& path);
std::string to_json(const TrainConfig& config);

// base_lr * min(1, step / warmup_steps); step counts from 1.
double lr_at(std::size_t step, const TrainConfig& config);

struct OptimizerState {
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double eps = 1e-8;

  ParamGrads m;
  ParamGrads v;
  std::uint64_t step = 0;

  static OptimizerState for_params(const EncoderParams& params);
};

// Bias-corrected Adam. Throws NumericError on non-finite gradients.
void adam_step(EncoderParams& params, const ParamGrads& grads, OptimizerState& state, double lr);

struct StepRecord {
  std::size_t step;
  double train_loss;
  double lr;
};

struct EvalRecord {
  std::size_t step;
  double eval_loss;
  double auc;
  double mrr10;
  double ndcg10;
};

struct RunReport {
  LossKind loss = LossKind::mw;
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  std::size_t best_checkpoint_step = 0;
  double best_eval_loss = 0.0;
  std::size_t steps_run = 0;
  bool stopped_early = false;
  double wall_time_seconds = 0.0;
};

struct EvalMetrics {
  double auc = 0.0;
  double aoc = 0.0;
  double mrr10 = 0.0;
  double ndcg10 = 0.0;
  double precision10 = 0.0;
  double recall1 = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  ScorePool pool;
};

// |queries| x |corpus| cosine scores under the encoder.
Matrix encoder_scores(const EncoderParams& params, const QuerySet& queries, const Corpus& corpus);

// Pooled AUC over top_k negatives plus rank metrics on the full corpus.
EvalMetrics evaluate(const EncoderParams& params, const QuerySet& queries, const Corpus& corpus,
                     std::size_t top_k = 500);

// {auc, aoc, mrr_at_10, ndcg_at_10, n_pos, n_neg}
std::string metrics_json(const EvalMetrics& m);

struct TrainOptions {
  // When set, ckpt_<step> is written here on every eval-loss improvement.
  std::optional<std::filesystem::path> checkpoint_dir;
};

struct TrainResult {
  EncoderParams best;
  RunReport report;
};

/// Samples batches, encodes queries and batch passages with shared weights,
/// scores, applies the configured loss, backpropagates and takes an Adam step.
/// Evaluates at step 0, every eval_every steps and at the last step; keeps
/// the parameters with the lowest eval loss and stops after `patience`
/// evaluations without strict improvement or after max_epochs.
TrainResult train(const TrainConfig& config, const QuerySet& train_queries,
                  const QuerySet& eval_queries, const Corpus& corpus,
                  const TrainOptions& options = {});

// report.json, steps.csv, evals.csv. Wall time is left out of report.json so
// that reruns are byte-identical.
void write_run_report(const std::filesystem::path& dir, const RunReport& report);

struct AblationGrid {
  std::vector<double> learning_rates;
  std::vector<std::size_t> batch_sizes;
  std::vector<std::size_t> hard_negatives;
};

struct AblationRow {
  double lr;
  std::size_t batch_size;
  std::size_t hard_negatives;
  double precision10;
  double recall1;
  double mrr;
  double ndcg10;
  double auc;
};

/// One full train + test evaluation per grid cell, lr-major order.
std::vector<AblationRow> ablation_sweep(const AblationGrid& grid, const TrainConfig& base,
                                        const QuerySet& train_queries, const QuerySet& eval_queries,
                                        const QuerySet& test_queries, const Corpus& corpus);

// Header: lr,batch_size,hard_negative,precision@10,recall@1,MRR,nDCG@10,AUC
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace mwlab
