#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mwlab/kernels.hpp"

namespace mwlab::kernels {

namespace {
Backend g_backend = Backend::parallel;
int g_threads = 0;

bool use_parallel() { return g_backend == Backend::parallel; }
}  // namespace

void set_backend(Backend b) { g_backend = b; }
Backend backend() { return g_backend; }

void set_num_threads(int n) {
  g_threads = n;
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#endif
}

int num_threads() {
#ifdef _OPENMP
  return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
  return 1;
#endif
}

void configure_from_env() {
  const char* env = std::getenv("MWLAB_THREADS");
  if (env == nullptr || *env == '\0') return;
  const int n = std::atoi(env);
  if (n <= 0) return;
  set_num_threads(n);
  set_backend(n == 1 ? Backend::serial : Backend::parallel);
}

Matrix similarity(const Matrix& a, const Matrix& b) {
  return use_parallel() ? parallel::similarity(a, b) : serial::similarity(a, b);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  return use_parallel() ? parallel::matmul(a, b) : serial::matmul(a, b);
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  return use_parallel() ? parallel::matmul_tn(a, b) : serial::matmul_tn(a, b);
}

Matrix embedding_bag_mean(const Matrix& embedding, std::span<const TokenBag> bags) {
  return use_parallel() ? parallel::embedding_bag_mean(embedding, bags)
                        : serial::embedding_bag_mean(embedding, bags);
}

void embedding_bag_backward(std::span<const TokenBag> bags, const Matrix& grad,
                            std::span<const char> skip, Matrix& d_embedding) {
  if (use_parallel()) {
    parallel::embedding_bag_backward(bags, grad, skip, d_embedding);
  } else {
    serial::embedding_bag_backward(bags, grad, skip, d_embedding);
  }
}

std::vector<std::vector<std::size_t>> top_k_rows(
    const Matrix& scores, std::span<const std::vector<std::size_t>> exclude,
    std::size_t k, std::span<const std::string> keys) {
  return use_parallel() ? parallel::top_k_rows(scores, exclude, k, keys)
                        : serial::top_k_rows(scores, exclude, k, keys);
}

double mw_pairwise(std::span<const double> pos, std::span<const double> neg,
                   double tau, double scale, std::span<double> d_pos,
                   std::span<double> d_neg) {
  return use_parallel() ? parallel::mw_pairwise(pos, neg, tau, scale, d_pos, d_neg)
                        : serial::mw_pairwise(pos, neg, tau, scale, d_pos, d_neg);
}

}  // namespace mwlab::kernels
