#include "mwlab/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "mwlab/error.hpp"
#include "mwlab/rng.hpp"

namespace mwlab {

namespace {

constexpr double kMinNorm = 1e-12;

bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

}  // namespace

void EncoderConfig::validate() const {
  if (hash_dim == 0 || embed_dim == 0 || proj_dim == 0) {
    throw ValidationError("encoder dimensions must be >= 1");
  }
  if (!std::has_single_bit(hash_dim)) throw ValidationError("hash_dim must be a power of two");
}

ParamGrads ParamGrads::zeros_like(const EncoderParams& params) {
  return {Matrix(params.embedding.rows(), params.embedding.cols()),
          Matrix(params.projection.rows(), params.projection.cols())};
}

void ParamGrads::zero() {
  embedding.fill(0.0);
  projection.fill(0.0);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

TokenBag tokenize_hash(std::string_view text, std::size_t hash_dim) {
  std::vector<std::uint32_t> buckets;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    buckets.push_back(static_cast<std::uint32_t>(fnv1a64(token) & (hash_dim - 1)));
    token.clear();
  };
  for (char c : text) {
    if (is_token_byte(static_cast<unsigned char>(c))) {
      token.push_back(ascii_lower(c));
    } else {
      flush();
    }
  }
  flush();

  std::sort(buckets.begin(), buckets.end());
  TokenBag bag;
  for (std::size_t i = 0; i < buckets.size();) {
    std::size_t j = i;
    while (j < buckets.size() && buckets[j] == buckets[i]) ++j;
    bag.entries.emplace_back(buckets[i], static_cast<std::uint32_t>(j - i));
    i = j;
  }
  bag.total = static_cast<std::uint32_t>(buckets.size());
  return bag;
}

EncoderParams init_params(const EncoderConfig& config) {
  config.validate();
  EncoderParams p{config, Matrix(config.hash_dim, config.embed_dim),
                  Matrix(config.embed_dim, config.proj_dim)};
  Rng rng(config.seed);
  auto fill = [&](Matrix& m) {
    const double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (double& v : m.values()) v = rng.uniform(-a, a);
  };
  fill(p.embedding);
  fill(p.projection);
  return p;
}

EmbeddingBatch encode_forward(const EncoderParams& params, std::span<const std::string> texts) {
  std::vector<TokenBag> bags;
  bags.reserve(texts.size());
  for (const auto& t : texts) bags.push_back(tokenize_hash(t, params.config.hash_dim));
  return encode_forward(params, std::move(bags));
}

EmbeddingBatch encode_forward(const EncoderParams& params, std::vector<TokenBag> bags) {
  EmbeddingBatch out;
  out.bags = std::move(bags);
  out.pooled = kernels::embedding_bag_mean(params.embedding, out.bags);
  out.vectors = kernels::matmul(out.pooled, params.projection);
  const std::size_t n = out.bags.size();
  out.norms.assign(n, 0.0);
  out.fallback.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    auto u = out.vectors.row(r);
    const double norm = std::sqrt(dot(u, u));
    out.norms[r] = norm;
    if (out.bags[r].empty() || !(norm >= kMinNorm)) {
      out.fallback[r] = 1;
      std::fill(u.begin(), u.end(), 0.0);
      u[0] = 1.0;
      continue;
    }
    for (double& x : u) x /= norm;
  }
  return out;
}

void encode_backward(const EmbeddingBatch& batch, const Matrix& upstream,
                     const EncoderParams& params, ParamGrads& grads) {
  if (upstream.rows() != batch.size() || upstream.cols() != batch.vectors.cols()) {
    throw ValidationError("upstream gradient shape mismatch");
  }
  if (grads.embedding.rows() != params.embedding.rows() ||
      grads.embedding.cols() != params.embedding.cols() ||
      grads.projection.rows() != params.projection.rows() ||
      grads.projection.cols() != params.projection.cols()) {
    throw ValidationError("gradient buffer shape mismatch");
  }
  // Through the normalization: d u = (I - uhat uhat^T) g / ||u||.
  Matrix d_u(batch.size(), batch.vectors.cols());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    if (batch.fallback[r]) continue;
    auto uhat = batch.vectors.row(r);
    auto g = upstream.row(r);
    const double along = dot(uhat, g);
    const double inv = 1.0 / batch.norms[r];
    auto d = d_u.row(r);
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = (g[j] - along * uhat[j]) * inv;
  }

  const Matrix d_proj = kernels::matmul_tn(batch.pooled, d_u);
  auto acc = grads.projection.values();
  auto src = d_proj.values();
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += src[i];

  const Matrix d_pooled = kernels::similarity(d_u, params.projection);
  kernels::embedding_bag_backward(batch.bags, d_pooled, batch.fallback, grads.embedding);
}

namespace {

void write_floats(std::ofstream& out, const Matrix& m) {
  static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes little-endian");
  std::vector<float> buf(m.size());
  auto v = m.values();
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(v[i]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

void read_floats(std::ifstream& in, Matrix& m, const std::filesystem::path& path) {
  std::vector<float> buf(m.size());
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != buf.size() * sizeof(float)) {
    throw IoError("truncated checkpoint " + path.string());
  }
  auto v = m.values();
  for (std::size_t i = 0; i < buf.size(); ++i) v[i] = static_cast<double>(buf[i]);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params,
                     std::uint64_t step) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  nlohmann::ordered_json header;
  header["hash_dim"] = params.config.hash_dim;
  header["embed_dim"] = params.config.embed_dim;
  header["proj_dim"] = params.config.proj_dim;
  header["seed"] = params.config.seed;
  header["step"] = step;
  out << header.dump() << '\n';
  write_floats(out, params.embedding);
  write_floats(out, params.projection);
  if (!out) throw IoError("write failed for " + path.string());
}

EncoderParams load_checkpoint(const std::filesystem::path& path, std::uint64_t* step) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty checkpoint " + path.string());
  EncoderConfig cfg;
  std::uint64_t saved_step = 0;
  try {
    const auto h = nlohmann::json::parse(line);
    cfg.hash_dim = h.at("hash_dim").get<std::size_t>();
    cfg.embed_dim = h.at("embed_dim").get<std::size_t>();
    cfg.proj_dim = h.at("proj_dim").get<std::size_t>();
    cfg.seed = h.at("seed").get<std::uint64_t>();
    saved_step = h.at("step").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad checkpoint header in " + path.string() + ": " + e.what());
  }
  cfg.validate();
  EncoderParams p{cfg, Matrix(cfg.hash_dim, cfg.embed_dim), Matrix(cfg.embed_dim, cfg.proj_dim)};
  read_floats(in, p.embedding, path);
  read_floats(in, p.projection, path);
  if (step != nullptr) *step = saved_step;
  return p;
}

}  // namespace mwlab
