#pragma once

#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mwlab/data.hpp"
#include "mwlab/matrix.hpp"

namespace mwlab {

struct ScorePool {
  std::vector<double> positives;
  std::vector<double> negatives;

  void append(const ScorePool& other);
};

struct RocPoint {
  double fpr;
  double tpr;
};

struct RankedList {
  std::vector<std::string> ids;  // descending score
  std::unordered_set<std::string> relevant;
};

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> pos_counts;
  std::vector<std::size_t> neg_counts;

  std::size_t bins() const { return pos_counts.size(); }
};

// U = sum over pairs of 1[s+ > s-] + 0.5 * 1[s+ == s-], by sorted merge.
double mann_whitney_u(const ScorePool& pool);

// U / (n+ n-); ties count half.
double auc(const ScorePool& pool);

// Fraction of pairs with s+ < s- (ties count zero).
double strict_aoc(const ScorePool& pool);

// Fraction of pairs with s+ == s-.
double tie_fraction(const ScorePool& pool);

/// Thresholds sweep the distinct scores in descending order. Each point adds
/// every positive and negative at that score at once, so ties give a diagonal
/// segment. Starts at (0,0) and ends at (1,1).
std::vector<RocPoint> roc_curve(const ScorePool& pool);

double trapezoid_area(std::span<const RocPoint> curve);

/// Evaluation pool over a full score matrix (|queries| x |corpus|): each
/// query contributes its positives' scores and the top_k scores among its
/// non-positives (ties by ascending id). Returns the pool and its AUC.
std::pair<ScorePool, double> pooled_auc_protocol(const QuerySet& queries, const Corpus& corpus,
                                                 const Matrix& scores, std::size_t top_k = 500);

// Top-`depth` documents per query (positives included) for rank metrics.
std::vector<RankedList> rank_corpus(const QuerySet& queries, const Corpus& corpus,
                                    const Matrix& scores, std::size_t depth = 10);

double mrr_at_k(std::span<const RankedList> lists, std::size_t k = 10);

// Binary gains, DCG = sum_{r<=k} rel_r / log2(r + 1). Queries without any
// relevant documents count as 0.
double ndcg_at_k(std::span<const RankedList> lists, std::size_t k = 10);

// Mean of |relevant in top k| / k.
double precision_at_k(std::span<const RankedList> lists, std::size_t k);

// Mean of |relevant in top k| / |relevant|.
double recall_at_k(std::span<const RankedList> lists, std::size_t k);

/// Equal-width bins over [min, max] of both sides together. Bins are
/// right-open except the last. A zero-width range puts everything in bin 0.
Histogram histogram(const ScorePool& pool, std::size_t bins);

// Sum over bins of min(pos_share, neg_share); 1 means identical histograms.
double overlap_coefficient(const Histogram& h);

}  // namespace mwlab
