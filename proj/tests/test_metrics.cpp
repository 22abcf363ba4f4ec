#include <gtest/gtest.h>

#include "mwlab/error.hpp"
#include "mwlab/metrics.hpp"
#include "test_support.hpp"

using namespace mwlab;
using mwlab::testing::brute_force_u;
using mwlab::testing::random_pool;

namespace {

RankedList list_with_relevant_at(std::size_t rank, std::size_t length = 10) {
  RankedList l;
  for (std::size_t r = 1; r <= length; ++r) l.ids.push_back("d" + std::to_string(r));
  if (rank > 0) l.relevant.insert("d" + std::to_string(rank));
  return l;
}

}  // namespace

TEST(MannWhitney, WorkedPools) {
  EXPECT_EQ(mann_whitney_u({{3, 1}, {2, 0}}), 3.0);
  EXPECT_EQ(mann_whitney_u({{0.5}, {0.5}}), 0.5);
  EXPECT_EQ(mann_whitney_u({{1, 1}, {0, 0}}), 4.0);
  EXPECT_THROW(mann_whitney_u({{1.0}, {}}), ValidationError);
}

TEST(MannWhitney, MatchesBruteForce) {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_pool(1 + rng.below(40), 1 + rng.below(40), rng, t % 2 ? 5 : 0);
    EXPECT_EQ(mann_whitney_u(p), brute_force_u(p));
  }
}

TEST(Auc, WorkedPoolsAndShift) {
  EXPECT_EQ(auc({{0.9, 0.8}, {0.1, 0.2}}), 1.0);
  EXPECT_EQ(auc({{0.3, 0.7}, {0.5}}), 0.5);
  Rng rng(1);
  auto p = random_pool(30, 40, rng);
  const double a = auc(p);
  for (auto& v : p.positives) v += 0.25;
  for (auto& v : p.negatives) v += 0.25;
  EXPECT_EQ(auc(p), a);
}

TEST(Auc, TiesSplitBetweenStrictAocAndTieFraction) {
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_pool(1 + rng.below(20), 1 + rng.below(20), rng, 4);
    EXPECT_NEAR(1.0 - auc(p), strict_aoc(p) + 0.5 * tie_fraction(p), 1e-12);
  }
  EXPECT_EQ(strict_aoc({{0.5}, {0.5}}), 0.0);
  EXPECT_EQ(tie_fraction({{0.5}, {0.5}}), 1.0);
}

TEST(Roc, Shapes) {
  const auto sep = roc_curve({{0.9, 0.8}, {0.1, 0.2}});
  ASSERT_EQ(sep.size(), 5u);
  EXPECT_EQ(sep.front().fpr, 0.0);
  EXPECT_EQ(sep.front().tpr, 0.0);
  EXPECT_EQ(sep[2].fpr, 0.0);
  EXPECT_EQ(sep[2].tpr, 1.0);
  EXPECT_EQ(sep.back().fpr, 1.0);
  EXPECT_EQ(sep.back().tpr, 1.0);
  const auto flat = roc_curve({{0.3, 0.3}, {0.3}});
  ASSERT_EQ(flat.size(), 2u);
  EXPECT_EQ(trapezoid_area(flat), 0.5);
}

TEST(Roc, AreaEqualsAuc) {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_pool(100, 100, rng, t % 3 == 0 ? 7 : 0);
    EXPECT_NEAR(trapezoid_area(roc_curve(p)), auc(p), 1e-12);
  }
}

TEST(PooledProtocol, WorkedExamples) {
  Corpus c;
  for (const char* id : {"p", "n1", "n2", "n3"}) c.add({id, "t"});
  const QuerySet one{{"q", "t", {"p"}, {}}};
  Matrix s(1, 4);
  s(0, 0) = 0.9;
  s(0, 1) = 0.8;
  s(0, 2) = 0.2;
  s(0, 3) = 0.1;
  auto [pool, a] = pooled_auc_protocol(one, c, s, 2);
  EXPECT_EQ(pool.positives, (std::vector<double>{0.9}));
  EXPECT_EQ(pool.negatives, (std::vector<double>{0.8, 0.2}));
  EXPECT_EQ(a, 1.0);
  auto [all, a2] = pooled_auc_protocol(one, c, s, 100);
  EXPECT_EQ(all.negatives.size(), 3u);

  Corpus c2;
  for (const char* id : {"p1", "p2", "n"}) c2.add({id, "t"});
  const QuerySet two{{"q1", "t", {"p1"}, {}}, {"q2", "t", {"p2"}, {}}};
  Matrix s2(2, 3);
  s2(0, 0) = 0.9;
  s2(0, 1) = -5.0;
  s2(0, 2) = 0.1;
  s2(1, 0) = -5.0;
  s2(1, 1) = 0.3;
  s2(1, 2) = 0.5;
  // Top-1 non-positive per query: q1 keeps 0.1, q2 keeps 0.5.
  auto [pool2, a3] = pooled_auc_protocol(two, c2, s2, 1);
  EXPECT_EQ(mann_whitney_u(pool2), 3.0);
  EXPECT_EQ(a3, 0.75);
}

TEST(RankMetrics, Mrr) {
  std::vector<RankedList> l{list_with_relevant_at(3)};
  EXPECT_NEAR(mrr_at_k(l), 1.0 / 3, 1e-15);
  l = {list_with_relevant_at(0)};
  EXPECT_EQ(mrr_at_k(l), 0.0);
  l = {list_with_relevant_at(1), list_with_relevant_at(2)};
  EXPECT_EQ(mrr_at_k(l), 0.75);
  l = {list_with_relevant_at(4)};
  EXPECT_EQ(mrr_at_k(l, 3), 0.0);
}

TEST(RankMetrics, Ndcg) {
  std::vector<RankedList> l{list_with_relevant_at(1)};
  EXPECT_EQ(ndcg_at_k(l), 1.0);
  l = {list_with_relevant_at(2)};
  EXPECT_NEAR(ndcg_at_k(l), 1.0 / std::log2(3.0), 1e-15);
  EXPECT_NEAR(ndcg_at_k(l), 0.6309, 1e-4);
  l = {list_with_relevant_at(0)};
  EXPECT_EQ(ndcg_at_k(l), 0.0);
  RankedList two = list_with_relevant_at(2);
  two.relevant.insert("d1");
  l = {two};
  EXPECT_NEAR(ndcg_at_k(l), 1.0, 1e-15);
}

TEST(RankMetrics, PrecisionAndRecall) {
  RankedList r = list_with_relevant_at(2);
  r.relevant.insert("d20");
  std::vector<RankedList> l{r};
  EXPECT_NEAR(precision_at_k(l, 10), 0.1, 1e-15);
  EXPECT_EQ(recall_at_k(l, 1), 0.0);
  EXPECT_EQ(recall_at_k(l, 2), 0.5);
}

TEST(Histogram, Contract) {
  auto h = histogram({{0.0, 1.0}, {}}, 2);
  EXPECT_EQ(h.pos_counts, (std::vector<std::size_t>{1, 1}));
  h = histogram({{0.4, 0.4}, {0.4}}, 5);
  EXPECT_EQ(h.pos_counts[0], 2u);
  EXPECT_EQ(h.neg_counts[0], 1u);
  EXPECT_EQ(overlap_coefficient(h), 1.0);

  Rng rng(10);
  ScorePool u;
  for (int i = 0; i < 1000; ++i) u.negatives.push_back(rng.uniform());
  u.positives.push_back(0.0);
  u.positives.push_back(1.0);
  h = histogram(u, 10);
  std::size_t total = 0;
  for (std::size_t b = 0; b < 10; ++b) {
    EXPECT_NEAR(static_cast<double>(h.neg_counts[b]), 100.0, 5 * std::sqrt(1000 * 0.1 * 0.9));
    total += h.neg_counts[b] + h.pos_counts[b];
  }
  EXPECT_EQ(total, 1002u);
  EXPECT_THROW(histogram(u, 0), ValidationError);
}

TEST(Histogram, OverlapOfDisjointSides) {
  const auto h = histogram({{1.0, 0.9}, {0.0, 0.1}}, 4);
  EXPECT_EQ(overlap_coefficient(h), 0.0);
}
