#include "mwlab/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "mwlab/error.hpp"
#include "mwlab/io.hpp"
#include "mwlab/kernels.hpp"

namespace mwlab {

using nlohmann::json;

void Corpus::add(Document doc) {
  if (doc.id.empty()) throw ValidationError("document with empty id");
  if (doc.text.empty()) throw ValidationError("document '" + doc.id + "' has empty text");
  if (index_.contains(doc.id)) throw ValidationError("duplicate document id '" + doc.id + "'");
  index_.emplace(doc.id, docs_.size());
  ids_.push_back(doc.id);
  docs_.push_back(std::move(doc));
}

std::optional<std::size_t> Corpus::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> TrainingBatch::passage_columns() const {
  std::vector<std::size_t> cols(positives);
  for (const auto& row : hard_negatives) cols.insert(cols.end(), row.begin(), row.end());
  return cols;
}

void SplitSpec::validate() const {
  const double test = 1.0 - train_fraction - eval_fraction;
  if (!(train_fraction > 0.0 && train_fraction < 1.0) ||
      !(eval_fraction > 0.0 && eval_fraction < 1.0) || !(test > 0.0)) {
    throw ValidationError("split fractions must be in (0,1) and leave a positive test fraction");
  }
}

namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

std::string string_field(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw ValidationError(ctx + "missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* key, const std::string& ctx,
                                     bool required) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw ValidationError(ctx + "missing list field '" + key + "'");
    return {};
  }
  if (!it->is_array()) throw ValidationError(ctx + "field '" + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw ValidationError(ctx + "field '" + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

json parse_line(const std::string& line, const std::string& ctx) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ValidationError(ctx + "malformed JSON (" + e.what() + ")");
  }
  if (!obj.is_object()) throw ValidationError(ctx + "expected a JSON object");
  return obj;
}

void check_query(const Query& q, const Corpus& corpus, const std::string& ctx) {
  if (q.id.empty()) throw ValidationError(ctx + "query with empty id");
  if (q.positive_ids.empty()) throw ValidationError(ctx + "query '" + q.id + "' has no positive_ids");
  std::unordered_set<std::string> pos;
  for (const auto& id : q.positive_ids) {
    if (!corpus.find(id)) {
      throw ValidationError(ctx + "query '" + q.id + "' references unknown document '" + id + "'");
    }
    pos.insert(id);
  }
  for (const auto& id : q.hard_negative_ids) {
    if (!corpus.find(id)) {
      throw ValidationError(ctx + "query '" + q.id + "' references unknown document '" + id + "'");
    }
    if (pos.contains(id)) {
      throw ValidationError(ctx + "query '" + q.id + "' lists '" + id +
                            "' as both positive and hard negative");
    }
  }
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  Corpus corpus;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (blank(lines[n])) continue;
    const std::string ctx = where(path, n + 1);
    const json obj = parse_line(lines[n], ctx);
    Document doc{string_field(obj, "id", ctx), string_field(obj, "text", ctx)};
    try {
      corpus.add(std::move(doc));
    } catch (const ValidationError& e) {
      throw ValidationError(ctx + e.what());
    }
  }
  return corpus;
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ostringstream out;
  for (const auto& d : corpus.documents()) {
    nlohmann::ordered_json obj;
    obj["id"] = d.id;
    obj["text"] = d.text;
    out << obj.dump() << '\n';
  }
  write_text(path, out.str());
}

QuerySet load_queries(const std::filesystem::path& path, const Corpus& corpus) {
  const auto lines = read_lines(path);
  QuerySet queries;
  std::unordered_set<std::string> seen;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (blank(lines[n])) continue;
    const std::string ctx = where(path, n + 1);
    const json obj = parse_line(lines[n], ctx);
    Query q;
    q.id = string_field(obj, "id", ctx);
    q.text = string_field(obj, "text", ctx);
    q.positive_ids = string_list(obj, "positive_ids", ctx, true);
    q.hard_negative_ids = string_list(obj, "hard_negative_ids", ctx, false);
    check_query(q, corpus, ctx);
    if (!seen.insert(q.id).second) throw ValidationError(ctx + "duplicate query id '" + q.id + "'");
    queries.push_back(std::move(q));
  }
  return queries;
}

void write_queries(const std::filesystem::path& path, const QuerySet& queries) {
  std::ostringstream out;
  for (const auto& q : queries) {
    nlohmann::ordered_json obj;
    obj["id"] = q.id;
    obj["text"] = q.text;
    obj["positive_ids"] = q.positive_ids;
    obj["hard_negative_ids"] = q.hard_negative_ids;
    out << obj.dump() << '\n';
  }
  write_text(path, out.str());
}

void validate_queries(const QuerySet& queries, const Corpus& corpus) {
  std::unordered_set<std::string> seen;
  for (const auto& q : queries) {
    check_query(q, corpus, "");
    if (!seen.insert(q.id).second) throw ValidationError("duplicate query id '" + q.id + "'");
  }
}

std::vector<QueryRefs> resolve(const QuerySet& queries, const Corpus& corpus) {
  std::vector<QueryRefs> out;
  out.reserve(queries.size());
  auto index_of = [&](const std::string& id) {
    auto idx = corpus.find(id);
    if (!idx) throw ValidationError("unknown document '" + id + "'");
    return *idx;
  };
  for (const auto& q : queries) {
    QueryRefs r;
    for (const auto& id : q.positive_ids) r.positives.push_back(index_of(id));
    for (const auto& id : q.hard_negative_ids) r.hard_negatives.push_back(index_of(id));
    out.push_back(std::move(r));
  }
  return out;
}

MiningResult mine_hard_negatives(const QuerySet& queries, const Corpus& corpus,
                                 const Matrix& scores, std::size_t k) {
  if (k == 0) throw ValidationError("mining requires k >= 1");
  if (scores.rows() != queries.size() || scores.cols() != corpus.size()) {
    throw ValidationError("score matrix shape does not match queries x corpus");
  }
  const auto refs = resolve(queries, corpus);
  std::vector<std::vector<std::size_t>> exclude(queries.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    exclude[i] = refs[i].positives;
    std::sort(exclude[i].begin(), exclude[i].end());
    exclude[i].erase(std::unique(exclude[i].begin(), exclude[i].end()), exclude[i].end());
  }
  const auto top = kernels::top_k_rows(scores, exclude, k, corpus.ids());

  MiningResult result{queries, {}};
  for (std::size_t i = 0; i < queries.size(); ++i) {
    auto& q = result.queries[i];
    q.hard_negative_ids.clear();
    for (std::size_t col : top[i]) q.hard_negative_ids.push_back(corpus[col].id);
    if (top[i].size() < k) {
      result.warnings.push_back("query '" + q.id + "': only " + std::to_string(top[i].size()) +
                                " negatives available (k=" + std::to_string(k) + ")");
    }
  }
  return result;
}

Matrix score_matrix(const QuerySet& queries, const Corpus& corpus, const PairScorer& scorer) {
  Matrix scores(queries.size(), corpus.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    for (std::size_t j = 0; j < corpus.size(); ++j) scores(i, j) = scorer(queries[i], corpus[j]);
  }
  return scores;
}

MiningResult mine_hard_negatives(const QuerySet& queries, const Corpus& corpus,
                                 const PairScorer& scorer, std::size_t k) {
  if (k == 0) throw ValidationError("mining requires k >= 1");
  return mine_hard_negatives(queries, corpus, score_matrix(queries, corpus, scorer), k);
}

TrainingBatch sample_batch(std::span<const QueryRefs> queries, std::size_t batch_size,
                           std::size_t hard_negatives, Rng& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (!queries[i].positives.empty() && queries[i].hard_negatives.size() >= hard_negatives) {
      eligible.push_back(i);
    }
  }
  if (eligible.size() < batch_size) {
    throw ValidationError("insufficient eligible queries: need " + std::to_string(batch_size) +
                          ", have " + std::to_string(eligible.size()));
  }

  TrainingBatch batch;
  std::unordered_set<std::size_t> used;
  std::vector<std::size_t> avail;
  const std::size_t n = eligible.size();
  for (std::size_t t = 0; t < n && batch.size() < batch_size; ++t) {
    std::swap(eligible[t], eligible[t + rng.below(n - t)]);
    const std::size_t q = eligible[t];
    avail.clear();
    for (std::size_t p : queries[q].positives) {
      if (!used.contains(p)) avail.push_back(p);
    }
    if (avail.empty()) continue;
    const std::size_t p = avail[rng.below(avail.size())];
    used.insert(p);
    batch.queries.push_back(q);
    batch.positives.push_back(p);
  }
  if (batch.size() < batch_size) {
    throw ValidationError("insufficient eligible queries with distinct positives");
  }

  batch.hard_negatives.resize(batch_size);
  std::vector<std::size_t> cand;
  for (std::size_t b = 0; b < batch_size; ++b) {
    const auto& all = queries[batch.queries[b]].hard_negatives;
    cand.clear();
    for (std::size_t d : all) {
      if (!used.contains(d)) cand.push_back(d);
    }
    if (cand.size() < hard_negatives) cand = all;
    auto& row = batch.hard_negatives[b];
    for (std::size_t h = 0; h < hard_negatives; ++h) {
      std::swap(cand[h], cand[h + rng.below(cand.size() - h)]);
      row.push_back(cand[h]);
    }
  }
  return batch;
}

QuerySplit split_queries(const QuerySet& queries, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = queries.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  for (std::size_t i = 0; i + 1 < n; ++i) std::swap(order[i], order[i + rng.below(n - i)]);

  const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
  const auto n_eval = static_cast<std::size_t>(std::floor(spec.eval_fraction * static_cast<double>(n)));
  auto take = [&](std::size_t from, std::size_t to) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(from),
                                 order.begin() + static_cast<std::ptrdiff_t>(to));
    std::sort(idx.begin(), idx.end());
    QuerySet out;
    for (std::size_t i : idx) out.push_back(queries[i]);
    return out;
  };
  return {take(0, n_train), take(n_train, n_train + n_eval), take(n_train + n_eval, n)};
}

}  // namespace mwlab
