#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mwlab/matrix.hpp"

namespace mwlab {

/// Similarities of B queries against the M = B + H*B passages of a batch.
/// Column j < B is the positive of query j; column B + i*H + h is hard
/// negative h of query i. The negative set of query i is every column but i,
/// so it has H*B + (B - 1) members. Temperature is carried here and applied
/// by the losses.
class ScoreBatch {
 public:
  // Throws ValidationError if sim is not B x (B + H*B) or tau <= 0.
  ScoreBatch(Matrix sim, std::size_t hard_negatives, double tau);

  const Matrix& sim() const { return sim_; }
  Matrix& sim() { return sim_; }
  double tau() const { return tau_; }
  std::size_t batch_size() const { return sim_.rows(); }
  std::size_t hard_negatives() const { return hard_negatives_; }
  std::size_t columns() const { return sim_.cols(); }

  double positive(std::size_t i) const { return sim_(i, i); }
  std::vector<double> positives() const;
  const std::vector<std::size_t>& negative_indices(std::size_t i) const { return negatives_[i]; }

 private:
  Matrix sim_;
  std::size_t hard_negatives_;
  double tau_;
  std::vector<std::vector<std::size_t>> negatives_;
};

// Loss gradient with respect to the raw (un-tempered) similarities.
struct ScoreGrad {
  Matrix d_sim;
};

struct ComparisonCounts {
  std::uint64_t cl_terms;
  std::uint64_t mw_terms;
  bool operator==(const ComparisonCounts&) const = default;
};

/// sim = q_emb * p_emb^T. Rows must be unit norm to 1e-4; H is inferred from
/// p_emb.rows() = B * (1 + H).
ScoreBatch score_batch(const Matrix& q_emb, const Matrix& p_emb, double tau);

/// Pairwise terms per batch: CL compares each positive with its own row,
/// B*(H*B + B - 1); MW compares each positive with the whole negative union,
/// B^2*(H*B + B - 1). Requires B >= 2.
ComparisonCounts comparison_counts(std::uint64_t batch_size, std::uint64_t hard_negatives);

/// Chain rule through sim = Q P^T: returns (d_sim * P, d_sim^T * Q).
std::pair<Matrix, Matrix> backprop_scores(const ScoreGrad& grad, const Matrix& q_emb,
                                          const Matrix& p_emb);

}  // namespace mwlab
