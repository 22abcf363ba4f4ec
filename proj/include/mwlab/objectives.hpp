#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mwlab/metrics.hpp"
#include "mwlab/rng.hpp"
#include "mwlab/scoring.hpp"

namespace mwlab {

enum class LossKind { cl, mw };

LossKind parse_loss_kind(std::string_view name);  // "cl" | "mw"
std::string to_string(LossKind kind);

struct LossOutput {
  double value = 0.0;
  ScoreGrad grad;
  std::uint64_t term_count = 0;
};

/// Batch contrastive loss:
///   -(1/B) sum_i log( exp(s+_i/tau) / (exp(s+_i/tau) + sum_{s in S-_i} exp(s/tau)) )
/// evaluated as log-sum-exp with the row maximum subtracted.
LossOutput cl_loss(const ScoreBatch& scores);

/// Batch Mann-Whitney loss over the union of all negative sets:
///   (1/B) sum_i sum_{s in S-} softplus(-(s+_i - s) / tau)
/// The union keeps every (query, passage) score, so |S-| = B*(H*B + B - 1).
LossOutput mw_loss(const ScoreBatch& scores);

LossOutput compute_loss(LossKind kind, const ScoreBatch& scores);

// Single-query contrastive term -log softmax of s_pos against negatives.
double contrastive_term(double positive, std::span<const double> negatives, double tau);

struct OffsetAssignment {
  std::vector<double> offsets;  // one per batch query
};

// Adds offsets[i] to every entry of row i.
ScoreBatch apply_offsets(const ScoreBatch& scores, const OffsetAssignment& offsets);

struct DegradationResult {
  double aoc_before;
  double aoc_after;
  double cl_before;
  double cl_after;
};

/// Draws g(q) ~ N(0, sigma^2) per query, shifts that query's positives and
/// negatives by it and reports pooled strict AoC and mean contrastive loss
/// before and after. One normal is drawn per query, in order.
DegradationResult gaussian_degradation_demo(std::span<const ScorePool> per_query, double sigma,
                                            double tau, Rng& rng);

struct BoundCheck {
  double aoc;
  double mw_population;
  bool holds;
};

/// Strict AoC against the mean pairwise log(1 + exp(-(s+ - s-)/tau)), and
/// whether aoc <= mw_population / log 2.
BoundCheck mw_bound_check(const ScorePool& pool, double tau);

}  // namespace mwlab
