#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "mwlab/matrix.hpp"
#include "mwlab/metrics.hpp"
#include "mwlab/rng.hpp"

namespace mwlab::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(std::filesystem::temp_directory_path() /
              ("mwlab_" + tag + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (auto& v : m.values()) v = scale * rng.normal();
  return m;
}

inline Matrix unit_rows(Matrix m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double n = std::sqrt(dot(row, row));
    for (auto& v : row) v /= n;
  }
  return m;
}

// Pool whose scores are integers in [0, levels) so ties are common.
inline ScorePool random_pool(std::size_t np, std::size_t nn, Rng& rng, std::uint64_t levels = 0) {
  ScorePool p;
  auto draw = [&] {
    return levels ? static_cast<double>(rng.below(levels)) : rng.normal();
  };
  for (std::size_t i = 0; i < np; ++i) p.positives.push_back(draw() + (levels ? 0.0 : 0.5));
  for (std::size_t i = 0; i < nn; ++i) p.negatives.push_back(draw());
  return p;
}

inline double brute_force_u(const ScorePool& p) {
  double u = 0.0;
  for (double a : p.positives) {
    for (double b : p.negatives) u += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  }
  return u;
}

}  // namespace mwlab::testing
