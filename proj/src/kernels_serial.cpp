#include <algorithm>

#include "mwlab/kernels.hpp"

namespace mwlab::kernels::serial {

Matrix similarity(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto o = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      auto br = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aik * br[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  Matrix out(a.cols(), b.cols());
  for (std::size_t p = 0; p < a.cols(); ++p) {
    auto o = out.row(p);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      const double aip = a(i, p);
      auto br = b.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aip * br[j];
    }
  }
  return out;
}

Matrix embedding_bag_mean(const Matrix& embedding, std::span<const TokenBag> bags) {
  Matrix out(bags.size(), embedding.cols());
  for (std::size_t r = 0; r < bags.size(); ++r) {
    const auto& bag = bags[r];
    if (bag.empty()) continue;
    auto o = out.row(r);
    const double inv = 1.0 / static_cast<double>(bag.total);
    for (const auto& [bucket, count] : bag.entries) {
      const double w = static_cast<double>(count) * inv;
      auto e = embedding.row(bucket);
      for (std::size_t c = 0; c < o.size(); ++c) o[c] += w * e[c];
    }
  }
  return out;
}

void embedding_bag_backward(std::span<const TokenBag> bags, const Matrix& grad,
                            std::span<const char> skip, Matrix& d_embedding) {
  for (std::size_t r = 0; r < bags.size(); ++r) {
    const auto& bag = bags[r];
    if (skip[r] || bag.empty()) continue;
    const double inv = 1.0 / static_cast<double>(bag.total);
    auto g = grad.row(r);
    for (const auto& [bucket, count] : bag.entries) {
      const double w = static_cast<double>(count) * inv;
      auto d = d_embedding.row(bucket);
      for (std::size_t c = 0; c < d.size(); ++c) d[c] += w * g[c];
    }
  }
}

std::vector<std::vector<std::size_t>> top_k_rows(
    const Matrix& scores, std::span<const std::vector<std::size_t>> exclude,
    std::size_t k, std::span<const std::string> keys) {
  std::vector<std::vector<std::size_t>> out(scores.rows());
  std::vector<std::size_t> cand;
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    cand.clear();
    const auto& ex = exclude[r];
    for (std::size_t c = 0; c < scores.cols(); ++c) {
      if (!std::binary_search(ex.begin(), ex.end(), c)) cand.push_back(c);
    }
    auto row = scores.row(r);
    auto better = [&](std::size_t x, std::size_t y) {
      if (row[x] != row[y]) return row[x] > row[y];
      return keys[x] < keys[y];
    };
    const std::size_t take = std::min(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take),
                      cand.end(), better);
    out[r].assign(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

double mw_pairwise(std::span<const double> pos, std::span<const double> neg,
                   double tau, double scale, std::span<double> d_pos,
                   std::span<double> d_neg) {
  const bool grads = !d_pos.empty();
  if (grads) {
    std::fill(d_pos.begin(), d_pos.end(), 0.0);
    std::fill(d_neg.begin(), d_neg.end(), 0.0);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    double row = 0.0;
    double dp = 0.0;
    for (std::size_t k = 0; k < neg.size(); ++k) {
      const double x = -(pos[i] - neg[k]) / tau;
      row += softplus(x);
      if (grads) {
        const double w = scale * sigmoid(x);
        dp -= w;
        d_neg[k] += w;
      }
    }
    if (grads) d_pos[i] = dp;
    total += row;
  }
  return total;
}

}  // namespace mwlab::kernels::serial
