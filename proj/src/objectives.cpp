#include "mwlab/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mwlab/error.hpp"
#include "mwlab/kernels.hpp"

namespace mwlab {

LossKind parse_loss_kind(std::string_view name) {
  if (name == "cl") return LossKind::cl;
  if (name == "mw") return LossKind::mw;
  throw ValidationError("unknown loss '" + std::string(name) + "' (expected cl or mw)");
}

std::string to_string(LossKind kind) { return kind == LossKind::cl ? "cl" : "mw"; }

LossOutput cl_loss(const ScoreBatch& scores) {
  const std::size_t b = scores.batch_size();
  const std::size_t m = scores.columns();
  if (m < 2) throw ValidationError("contrastive loss needs at least one negative per query");
  const double tau = scores.tau();
  const Matrix& sim = scores.sim();

  LossOutput out;
  out.grad.d_sim = Matrix(b, m);
  const double scale = 1.0 / (static_cast<double>(b) * tau);
  std::vector<double> w(m);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    // S-_i is every column but i, so the softmax runs over the whole row.
    auto row = sim.row(i);
    const double mx = *std::max_element(row.begin(), row.end()) / tau;
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      w[j] = std::exp(row[j] / tau - mx);
      z += w[j];
    }
    total += mx + std::log(z) - row[i] / tau;
    auto g = out.grad.d_sim.row(i);
    for (std::size_t j = 0; j < m; ++j) g[j] = (w[j] / z) * scale;
    g[i] -= scale;
  }
  out.value = total / static_cast<double>(b);
  out.term_count = static_cast<std::uint64_t>(b) * (m - 1);
  return out;
}

LossOutput mw_loss(const ScoreBatch& scores) {
  const std::size_t b = scores.batch_size();
  const std::size_t m = scores.columns();
  if (m < 2) throw ValidationError("MW loss needs a non-empty negative set");
  const double tau = scores.tau();
  const Matrix& sim = scores.sim();

  const std::vector<double> pos = scores.positives();
  std::vector<double> neg;
  neg.reserve(b * (m - 1));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j : scores.negative_indices(i)) neg.push_back(sim(i, j));
  }
  std::vector<double> d_pos(pos.size());
  std::vector<double> d_neg(neg.size());
  const double inv_b = 1.0 / static_cast<double>(b);
  const double sum = kernels::mw_pairwise(pos, neg, tau, inv_b / tau, d_pos, d_neg);

  LossOutput out;
  out.value = sum * inv_b;
  out.term_count = static_cast<std::uint64_t>(b) * neg.size();
  out.grad.d_sim = Matrix(b, m);
  std::size_t k = 0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j : scores.negative_indices(i)) out.grad.d_sim(i, j) = d_neg[k++];
    out.grad.d_sim(i, i) = d_pos[i];
  }
  return out;
}

LossOutput compute_loss(LossKind kind, const ScoreBatch& scores) {
  return kind == LossKind::cl ? cl_loss(scores) : mw_loss(scores);
}

double contrastive_term(double positive, std::span<const double> negatives, double tau) {
  double mx = positive / tau;
  for (double s : negatives) mx = std::max(mx, s / tau);
  double z = std::exp(positive / tau - mx);
  for (double s : negatives) z += std::exp(s / tau - mx);
  return mx + std::log(z) - positive / tau;
}

ScoreBatch apply_offsets(const ScoreBatch& scores, const OffsetAssignment& offsets) {
  if (offsets.offsets.size() != scores.batch_size()) {
    throw ValidationError("need one offset per batch query");
  }
  Matrix sim = scores.sim();
  for (std::size_t i = 0; i < sim.rows(); ++i) {
    for (double& v : sim.row(i)) v += offsets.offsets[i];
  }
  return ScoreBatch(std::move(sim), scores.hard_negatives(), scores.tau());
}

namespace {

double mean_contrastive(std::span<const ScorePool> per_query, double tau) {
  double sum = 0.0;
  std::size_t terms = 0;
  for (const auto& q : per_query) {
    for (double p : q.positives) {
      sum += contrastive_term(p, q.negatives, tau);
      ++terms;
    }
  }
  return terms == 0 ? 0.0 : sum / static_cast<double>(terms);
}

ScorePool pooled(std::span<const ScorePool> per_query) {
  ScorePool all;
  for (const auto& q : per_query) all.append(q);
  return all;
}

}  // namespace

DegradationResult gaussian_degradation_demo(std::span<const ScorePool> per_query, double sigma,
                                            double tau, Rng& rng) {
  if (!(sigma >= 0.0)) throw ValidationError("sigma must be >= 0");
  if (!(tau > 0.0)) throw ValidationError("temperature must be > 0");
  std::vector<ScorePool> shifted(per_query.begin(), per_query.end());
  for (auto& q : shifted) {
    const double g = sigma * rng.normal();
    for (double& s : q.positives) s += g;
    for (double& s : q.negatives) s += g;
  }
  return {strict_aoc(pooled(per_query)), strict_aoc(pooled(shifted)),
          mean_contrastive(per_query, tau), mean_contrastive(shifted, tau)};
}

BoundCheck mw_bound_check(const ScorePool& pool, double tau) {
  if (!(tau > 0.0)) throw ValidationError("temperature must be > 0");
  if (pool.positives.empty() || pool.negatives.empty()) {
    throw ValidationError("score pool needs at least one positive and one negative");
  }
  const double pairs =
      static_cast<double>(pool.positives.size()) * static_cast<double>(pool.negatives.size());
  const double sum = kernels::mw_pairwise(pool.positives, pool.negatives, tau, 0.0, {}, {});
  BoundCheck c;
  c.aoc = strict_aoc(pool);
  c.mw_population = sum / pairs;
  c.holds = c.aoc <= c.mw_population / std::numbers::ln2;
  return c;
}

}  // namespace mwlab
