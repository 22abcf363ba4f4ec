#include "mwlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mwlab/error.hpp"
#include "mwlab/kernels.hpp"

namespace mwlab {

void ScorePool::append(const ScorePool& other) {
  positives.insert(positives.end(), other.positives.begin(), other.positives.end());
  negatives.insert(negatives.end(), other.negatives.begin(), other.negatives.end());
}

namespace {

void require_both_sides(const ScorePool& pool) {
  if (pool.positives.empty() || pool.negatives.empty()) {
    throw ValidationError("score pool needs at least one positive and one negative");
  }
}

struct PairCounts {
  double greater = 0.0;  // s+ > s-
  double equal = 0.0;
  double less = 0.0;
};

PairCounts count_pairs(const ScorePool& pool) {
  require_both_sides(pool);
  std::vector<double> pos(pool.positives);
  std::vector<double> neg(pool.negatives);
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  PairCounts c;
  std::size_t below = 0;  // negatives strictly below pos[i]
  std::size_t upto = 0;   // negatives <= pos[i]
  for (double p : pos) {
    while (below < neg.size() && neg[below] < p) ++below;
    if (upto < below) upto = below;
    while (upto < neg.size() && neg[upto] <= p) ++upto;
    c.greater += static_cast<double>(below);
    c.equal += static_cast<double>(upto - below);
  }
  const double total = static_cast<double>(pos.size()) * static_cast<double>(neg.size());
  c.less = total - c.greater - c.equal;
  return c;
}

double pair_total(const ScorePool& pool) {
  return static_cast<double>(pool.positives.size()) * static_cast<double>(pool.negatives.size());
}

}  // namespace

double mann_whitney_u(const ScorePool& pool) {
  const auto c = count_pairs(pool);
  return c.greater + 0.5 * c.equal;
}

double auc(const ScorePool& pool) { return mann_whitney_u(pool) / pair_total(pool); }

double strict_aoc(const ScorePool& pool) { return count_pairs(pool).less / pair_total(pool); }

double tie_fraction(const ScorePool& pool) { return count_pairs(pool).equal / pair_total(pool); }

std::vector<RocPoint> roc_curve(const ScorePool& pool) {
  require_both_sides(pool);
  std::vector<std::pair<double, bool>> all;
  all.reserve(pool.positives.size() + pool.negatives.size());
  for (double s : pool.positives) all.emplace_back(s, true);
  for (double s : pool.negatives) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  const double np = static_cast<double>(pool.positives.size());
  const double nn = static_cast<double>(pool.negatives.size());
  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) {
      (all[j].second ? tp : fp) += 1;
      ++j;
    }
    curve.push_back({static_cast<double>(fp) / nn, static_cast<double>(tp) / np});
    i = j;
  }
  return curve;
}

double trapezoid_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) * 0.5;
  }
  return area;
}

std::pair<ScorePool, double> pooled_auc_protocol(const QuerySet& queries, const Corpus& corpus,
                                                 const Matrix& scores, std::size_t top_k) {
  if (top_k == 0) throw ValidationError("top_k must be >= 1");
  if (scores.rows() != queries.size() || scores.cols() != corpus.size()) {
    throw ValidationError("score matrix shape does not match queries x corpus");
  }
  const auto refs = resolve(queries, corpus);
  std::vector<std::vector<std::size_t>> exclude(queries.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    exclude[i] = refs[i].positives;
    std::sort(exclude[i].begin(), exclude[i].end());
    exclude[i].erase(std::unique(exclude[i].begin(), exclude[i].end()), exclude[i].end());
    if (exclude[i].size() >= corpus.size()) {
      throw ValidationError("query '" + queries[i].id + "' has no non-positive documents");
    }
  }
  const auto top = kernels::top_k_rows(scores, exclude, top_k, corpus.ids());
  ScorePool pool;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    for (std::size_t p : refs[i].positives) pool.positives.push_back(scores(i, p));
    for (std::size_t n : top[i]) pool.negatives.push_back(scores(i, n));
  }
  const double value = auc(pool);
  return {std::move(pool), value};
}

std::vector<RankedList> rank_corpus(const QuerySet& queries, const Corpus& corpus,
                                    const Matrix& scores, std::size_t depth) {
  if (scores.rows() != queries.size() || scores.cols() != corpus.size()) {
    throw ValidationError("score matrix shape does not match queries x corpus");
  }
  const std::vector<std::vector<std::size_t>> none(queries.size());
  const auto top = kernels::top_k_rows(scores, none, depth, corpus.ids());
  std::vector<RankedList> lists(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    for (std::size_t c : top[i]) lists[i].ids.push_back(corpus[c].id);
    lists[i].relevant.insert(queries[i].positive_ids.begin(), queries[i].positive_ids.end());
  }
  return lists;
}

namespace {

void require_lists(std::span<const RankedList> lists, std::size_t k) {
  if (lists.empty()) throw ValidationError("empty ranked list collection");
  if (k == 0) throw ValidationError("k must be >= 1");
}

std::size_t hits_in_top(const RankedList& l, std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < std::min(k, l.ids.size()); ++r) hits += l.relevant.contains(l.ids[r]);
  return hits;
}

}  // namespace

double mrr_at_k(std::span<const RankedList> lists, std::size_t k) {
  require_lists(lists, k);
  double sum = 0.0;
  for (const auto& l : lists) {
    for (std::size_t r = 0; r < std::min(k, l.ids.size()); ++r) {
      if (l.relevant.contains(l.ids[r])) {
        sum += 1.0 / static_cast<double>(r + 1);
        break;
      }
    }
  }
  return sum / static_cast<double>(lists.size());
}

double ndcg_at_k(std::span<const RankedList> lists, std::size_t k) {
  require_lists(lists, k);
  double sum = 0.0;
  for (const auto& l : lists) {
    if (l.relevant.empty()) continue;
    double dcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, l.ids.size()); ++r) {
      if (l.relevant.contains(l.ids[r])) dcg += 1.0 / std::log2(static_cast<double>(r + 2));
    }
    double idcg = 0.0;
    for (std::size_t r = 0; r < std::min(k, l.relevant.size()); ++r) {
      idcg += 1.0 / std::log2(static_cast<double>(r + 2));
    }
    sum += dcg / idcg;
  }
  return sum / static_cast<double>(lists.size());
}

double precision_at_k(std::span<const RankedList> lists, std::size_t k) {
  require_lists(lists, k);
  double sum = 0.0;
  for (const auto& l : lists) sum += static_cast<double>(hits_in_top(l, k)) / static_cast<double>(k);
  return sum / static_cast<double>(lists.size());
}

double recall_at_k(std::span<const RankedList> lists, std::size_t k) {
  require_lists(lists, k);
  double sum = 0.0;
  for (const auto& l : lists) {
    if (l.relevant.empty()) continue;
    sum += static_cast<double>(hits_in_top(l, k)) / static_cast<double>(l.relevant.size());
  }
  return sum / static_cast<double>(lists.size());
}

Histogram histogram(const ScorePool& pool, std::size_t bins) {
  if (bins == 0) throw ValidationError("histogram needs bins >= 1");
  if (pool.positives.empty() && pool.negatives.empty()) throw ValidationError("empty score pool");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto* side : {&pool.positives, &pool.negatives}) {
    for (double v : *side) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.pos_counts.assign(bins, 0);
  h.neg_counts.assign(bins, 0);
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges[bins] = hi;
  auto bin_of = [&](double v) -> std::size_t {
    if (!(hi > lo)) return 0;
    const auto b = static_cast<std::size_t>(std::floor((v - lo) / width));
    return std::min(b, bins - 1);
  };
  for (double v : pool.positives) ++h.pos_counts[bin_of(v)];
  for (double v : pool.negatives) ++h.neg_counts[bin_of(v)];
  return h;
}

double overlap_coefficient(const Histogram& h) {
  std::size_t np = 0;
  std::size_t nn = 0;
  for (std::size_t b = 0; b < h.bins(); ++b) {
    np += h.pos_counts[b];
    nn += h.neg_counts[b];
  }
  if (np == 0 || nn == 0) throw ValidationError("overlap needs both sides non-empty");
  double ovl = 0.0;
  for (std::size_t b = 0; b < h.bins(); ++b) {
    ovl += std::min(static_cast<double>(h.pos_counts[b]) / static_cast<double>(np),
                    static_cast<double>(h.neg_counts[b]) / static_cast<double>(nn));
  }
  return ovl;
}

}  // namespace mwlab
