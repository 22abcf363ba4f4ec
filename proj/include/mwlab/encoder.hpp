#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mwlab/kernels.hpp"
#include "mwlab/matrix.hpp"

namespace mwlab {

struct EncoderConfig {
  std::size_t hash_dim = std::size_t{1} << 15;
  std::size_t embed_dim = 64;
  std::size_t proj_dim = 32;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

/// Shared-weight dual encoder: hashed bag of tokens -> mean of embedding rows
/// -> linear projection -> L2 normalization.
struct EncoderParams {
  EncoderConfig config;
  Matrix embedding;   // hash_dim x embed_dim
  Matrix projection;  // embed_dim x proj_dim

  bool all_finite() const { return embedding.all_finite() && projection.all_finite(); }
  bool operator==(const EncoderParams&) const = default;
};

// Gradient buffers, shaped like EncoderParams.
struct ParamGrads {
  Matrix embedding;
  Matrix projection;

  static ParamGrads zeros_like(const EncoderParams& params);
  void zero();
  bool all_finite() const { return embedding.all_finite() && projection.all_finite(); }
};

/// Forward outputs plus the intermediates the backward pass needs.
struct EmbeddingBatch {
  Matrix vectors;              // N x proj_dim, unit rows
  std::vector<TokenBag> bags;  // hashed tokens per row
  Matrix pooled;               // N x embed_dim, mean-pooled embeddings
  std::vector<double> norms;   // ||pooled * projection|| per row
  std::vector<char> fallback;  // row replaced by the first basis vector

  std::size_t size() const { return vectors.rows(); }
};

// FNV-1a 64-bit.
std::uint64_t fnv1a64(std::string_view bytes);

/// Lowercases ASCII, splits on runs of ASCII non-alphanumerics (bytes >= 0x80
/// stay inside tokens, so UTF-8 words survive intact) and hashes each token
/// to fnv1a64(token) mod hash_dim.
TokenBag tokenize_hash(std::string_view text, std::size_t hash_dim);

// Glorot-uniform init: U(-a, a), a = sqrt(6 / (fan_in + fan_out)), embedding
// first then projection, both row-major from one Rng(config.seed) stream.
EncoderParams init_params(const EncoderConfig& config);

EmbeddingBatch encode_forward(const EncoderParams& params, std::span<const std::string> texts);
EmbeddingBatch encode_forward(const EncoderParams& params, std::vector<TokenBag> bags);

/// Accumulates into `grads` the gradient of sum_r <upstream[r], vectors[r]>.
/// Fallback rows contribute nothing.
void encode_backward(const EmbeddingBatch& batch, const Matrix& upstream,
                     const EncoderParams& params, ParamGrads& grads);

// Checkpoint: one JSON header line {hash_dim, embed_dim, proj_dim, seed, step}
// followed by little-endian float32 values, embedding then projection, both
// row-major.
void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params,
                     std::uint64_t step);
EncoderParams load_checkpoint(const std::filesystem::path& path, std::uint64_t* step = nullptr);

}  // namespace mwlab
