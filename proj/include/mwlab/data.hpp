#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mwlab/matrix.hpp"
#include "mwlab/rng.hpp"

namespace mwlab {

struct Document {
  std::string id;
  std::string text;
};

struct Query {
  std::string id;
  std::string text;
  std::vector<std::string> positive_ids;
  std::vector<std::string> hard_negative_ids;
};

/// Documents in insertion order with an id index. Ids are unique and
/// non-empty; texts are non-empty.
class Corpus {
 public:
  // Throws ValidationError on an empty id/text or a duplicate id.
  void add(Document doc);

  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const Document& operator[](std::size_t i) const { return docs_[i]; }
  const std::vector<Document>& documents() const { return docs_; }
  const std::vector<std::string>& ids() const { return ids_; }
  std::optional<std::size_t> find(const std::string& id) const;

 private:
  std::vector<Document> docs_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

using QuerySet = std::vector<Query>;

// Query with its document references resolved to corpus indices.
struct QueryRefs {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> hard_negatives;
};

/// One training batch: B queries, one positive each (pairwise distinct) and
/// an H-wide row of hard negatives per query. All entries are indices: queries
/// into the QuerySet, passages into the Corpus.
struct TrainingBatch {
  std::vector<std::size_t> queries;
  std::vector<std::size_t> positives;
  std::vector<std::vector<std::size_t>> hard_negatives;

  std::size_t size() const { return queries.size(); }
  std::size_t hard_negative_count() const {
    return hard_negatives.empty() ? 0 : hard_negatives.front().size();
  }
  // Passage indices in column order: all positives, then hard negatives
  // query-major.
  std::vector<std::size_t> passage_columns() const;

  bool operator==(const TrainingBatch&) const = default;
};

struct SplitSpec {
  double train_fraction = 0.8;
  double eval_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct QuerySplit {
  QuerySet train;
  QuerySet eval;
  QuerySet test;
};

Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(const std::filesystem::path& path, const Corpus& corpus);

// Validates every reference against `corpus`. Ids must be unique.
QuerySet load_queries(const std::filesystem::path& path, const Corpus& corpus);
void write_queries(const std::filesystem::path& path, const QuerySet& queries);

// Same checks as load_queries, for in-memory sets.
void validate_queries(const QuerySet& queries, const Corpus& corpus);

std::vector<QueryRefs> resolve(const QuerySet& queries, const Corpus& corpus);

struct MiningResult {
  QuerySet queries;
  // One message per query that had fewer than k candidate negatives.
  std::vector<std::string> warnings;
};

/// Replaces each query's hard negatives with the k highest-scoring documents
/// that are not among its positives. `scores` is |queries| x |corpus|. Order is
/// score descending with ties broken by ascending document id.
MiningResult mine_hard_negatives(const QuerySet& queries, const Corpus& corpus,
                                 const Matrix& scores, std::size_t k);

using PairScorer = std::function<double(const Query&, const Document&)>;
MiningResult mine_hard_negatives(const QuerySet& queries, const Corpus& corpus,
                                 const PairScorer& scorer, std::size_t k);

Matrix score_matrix(const QuerySet& queries, const Corpus& corpus,
                    const PairScorer& scorer);

/// Samples B distinct queries (each with >= 1 positive and >= H hard
/// negatives), one uniform positive per query, and H hard negatives per query
/// without replacement. A query whose positives are all taken by earlier
/// picks is skipped. Hard negatives that coincide with another batch
/// positive are avoided whenever the query has enough other candidates.
TrainingBatch sample_batch(std::span<const QueryRefs> queries, std::size_t batch_size,
                           std::size_t hard_negatives, Rng& rng);

// Deterministic shuffle-and-cut; each part keeps the input order.
QuerySplit split_queries(const QuerySet& queries, const SplitSpec& spec);

}  // namespace mwlab
