#include "mwlab/scoring.hpp"

#include <cmath>
#include <string>

#include "mwlab/error.hpp"
#include "mwlab/kernels.hpp"

namespace mwlab {

ScoreBatch::ScoreBatch(Matrix sim, std::size_t hard_negatives, double tau)
    : sim_(std::move(sim)), hard_negatives_(hard_negatives), tau_(tau) {
  if (!(tau_ > 0.0)) throw ValidationError("temperature must be > 0");
  const std::size_t b = sim_.rows();
  if (b == 0) throw ValidationError("empty score batch");
  if (sim_.cols() != b + hard_negatives_ * b) {
    throw ValidationError("similarity matrix must be B x (B + H*B)");
  }
  negatives_.resize(b);
  for (std::size_t i = 0; i < b; ++i) {
    auto& idx = negatives_[i];
    idx.reserve(sim_.cols() - 1);
    for (std::size_t j = 0; j < sim_.cols(); ++j) {
      if (j != i) idx.push_back(j);
    }
  }
}

std::vector<double> ScoreBatch::positives() const {
  std::vector<double> out(batch_size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = positive(i);
  return out;
}

namespace {

void require_unit_rows(const Matrix& m, const char* what) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double n = std::sqrt(dot(m.row(r), m.row(r)));
    if (std::abs(n - 1.0) > 1e-4) {
      throw ValidationError(std::string(what) + " row " + std::to_string(r) + " is not unit norm");
    }
  }
}

}  // namespace

ScoreBatch score_batch(const Matrix& q_emb, const Matrix& p_emb, double tau) {
  if (!(tau > 0.0)) throw ValidationError("temperature must be > 0");
  const std::size_t b = q_emb.rows();
  if (b == 0 || q_emb.cols() != p_emb.cols() || p_emb.rows() < b || p_emb.rows() % b != 0) {
    throw ValidationError("passage count must be B * (1 + H) with matching dimensions");
  }
  require_unit_rows(q_emb, "query embedding");
  require_unit_rows(p_emb, "passage embedding");
  return ScoreBatch(kernels::similarity(q_emb, p_emb), p_emb.rows() / b - 1, tau);
}

ComparisonCounts comparison_counts(std::uint64_t batch_size, std::uint64_t hard_negatives) {
  if (batch_size < 2) throw ValidationError("comparison counts require B >= 2");
  const std::uint64_t row = hard_negatives * batch_size + batch_size - 1;
  return {batch_size * row, batch_size * batch_size * row};
}

std::pair<Matrix, Matrix> backprop_scores(const ScoreGrad& grad, const Matrix& q_emb,
                                          const Matrix& p_emb) {
  const Matrix& d = grad.d_sim;
  if (d.rows() != q_emb.rows() || d.cols() != p_emb.rows() || q_emb.cols() != p_emb.cols()) {
    throw ValidationError("backprop_scores shape mismatch");
  }
  return {kernels::matmul(d, p_emb), kernels::matmul_tn(d, q_emb)};
}

}  // namespace mwlab
