#pragma once

// Data-parallel numeric kernels. Each kernel has a serial reference in
// mwlab::kernels::serial and an OpenMP version in mwlab::kernels::parallel.
// The two produce bit-identical results: the parallel versions only split
// work over independent output elements and keep every floating-point
// reduction in the same index order as the serial loop.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mwlab/matrix.hpp"

namespace mwlab {

// Sparse bag of hashed tokens: (bucket, count) pairs sorted by bucket.
struct TokenBag {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
  std::uint32_t total = 0;  // sum of counts

  bool empty() const { return total == 0; }
  bool operator==(const TokenBag&) const = default;
};

inline double softplus(double x) {
  return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace kernels {

enum class Backend { serial, parallel };

void set_backend(Backend b);
Backend backend();

// Thread cap for the parallel backend; <= 0 means the OpenMP default.
void set_num_threads(int n);
int num_threads();

// Reads MWLAB_THREADS; "1" also selects the serial backend.
void configure_from_env();

namespace serial {
Matrix similarity(const Matrix& a, const Matrix& b);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix embedding_bag_mean(const Matrix& embedding, std::span<const TokenBag> bags);
void embedding_bag_backward(std::span<const TokenBag> bags, const Matrix& grad,
                            std::span<const char> skip, Matrix& d_embedding);
std::vector<std::vector<std::size_t>> top_k_rows(
    const Matrix& scores, std::span<const std::vector<std::size_t>> exclude,
    std::size_t k, std::span<const std::string> keys);
double mw_pairwise(std::span<const double> pos, std::span<const double> neg,
                   double tau, double scale, std::span<double> d_pos,
                   std::span<double> d_neg);
}  // namespace serial

namespace parallel {
Matrix similarity(const Matrix& a, const Matrix& b);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix embedding_bag_mean(const Matrix& embedding, std::span<const TokenBag> bags);
void embedding_bag_backward(std::span<const TokenBag> bags, const Matrix& grad,
                            std::span<const char> skip, Matrix& d_embedding);
std::vector<std::vector<std::size_t>> top_k_rows(
    const Matrix& scores, std::span<const std::vector<std::size_t>> exclude,
    std::size_t k, std::span<const std::string> keys);
double mw_pairwise(std::span<const double> pos, std::span<const double> neg,
                   double tau, double scale, std::span<double> d_pos,
                   std::span<double> d_neg);
}  // namespace parallel

// A * B^T, shape rows(A) x rows(B).
Matrix similarity(const Matrix& a, const Matrix& b);
// A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// Row r is the count-weighted mean of the embedding rows named by bags[r].
// Empty bags give a zero row.
Matrix embedding_bag_mean(const Matrix& embedding, std::span<const TokenBag> bags);

// d_embedding[b] += (count / total) * grad[r] for each (b, count) of bags[r].
// Rows with skip[r] != 0 contribute nothing.
void embedding_bag_backward(std::span<const TokenBag> bags, const Matrix& grad,
                            std::span<const char> skip, Matrix& d_embedding);

// For each row of `scores`, the column indices of the k largest entries,
// skipping the (ascending) columns in exclude[row]. Order is score
// descending, ties broken by ascending keys[col]. Fewer than k are returned
// when the row runs out of candidates.
std::vector<std::vector<std::size_t>> top_k_rows(
    const Matrix& scores, std::span<const std::vector<std::size_t>> exclude,
    std::size_t k, std::span<const std::string> keys);

// Returns sum over (i, k) of softplus(-(pos[i] - neg[k]) / tau).
// When d_pos/d_neg are non-empty they are overwritten with
//   d_pos[i] = -scale * sum_k sigmoid(-(pos[i] - neg[k]) / tau)
//   d_neg[k] = +scale * sum_i sigmoid(-(pos[i] - neg[k]) / tau)
// so scale = 1 / (B * tau) yields the gradient of the sum divided by B.
double mw_pairwise(std::span<const double> pos, std::span<const double> neg,
                   double tau, double scale, std::span<double> d_pos,
                   std::span<double> d_neg);

}  // namespace kernels
}  // namespace mwlab
