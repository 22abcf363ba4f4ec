#include <gtest/gtest.h>

#include <sstream>

#include "mwlab/error.hpp"
#include "mwlab/experiments.hpp"
#include "mwlab/io.hpp"
#include "mwlab/synthetic.hpp"
#include "test_support.hpp"

using namespace mwlab;
using mwlab::testing::TempDir;

TEST(Synthetic, ShapeAndDeterminism) {
  SyntheticSpec spec;
  spec.n_queries = 50;
  spec.n_docs = 120;
  const auto a = make_synthetic(spec);
  const auto b = make_synthetic(spec);
  EXPECT_EQ(a.corpus.size(), 120u);
  ASSERT_EQ(a.queries.size(), 50u);
  EXPECT_EQ(a.queries[7].text, b.queries[7].text);
  EXPECT_EQ(a.corpus[3].text, b.corpus[3].text);
  for (const auto& q : a.queries) {
    EXPECT_EQ(q.positive_ids.size(), 1u);
    EXPECT_TRUE(q.hard_negative_ids.empty());
  }
  spec.seed = 8;
  EXPECT_NE(make_synthetic(spec).queries[7].text, a.queries[7].text);
  spec.n_queries = 500;
  EXPECT_THROW(make_synthetic(spec), ValidationError);
}

TEST(Compare, ZeroStepsGivesZeroGain) {
  SyntheticSpec spec;
  spec.n_queries = 60;
  spec.n_docs = 120;
  spec.n_topics = 20;
  const auto data = make_synthetic(spec);
  CompareOptions opts;
  opts.base.max_epochs = 0;
  opts.base.hash_dim = 512;
  opts.base.batch_size = 4;
  opts.base.eval_top_k = 50;
  opts.seeds = {1};
  const auto r = run_compare(data.corpus, data.queries, opts);
  ASSERT_EQ(r.seeds.size(), 1u);
  EXPECT_EQ(r.seeds[0].auc_gain, 0.0);
  EXPECT_EQ(r.seeds[0].cl.auc, r.seeds[0].mw.auc);
  EXPECT_EQ(r.mean_auc_gain, 0.0);
  opts.seeds.clear();
  EXPECT_THROW(run_compare(data.corpus, data.queries, opts), ValidationError);
}

TEST(Lemma1Csv, RowsBehave) {
  const auto pools = synthetic_query_pools(250, 8, 4);
  const std::vector<double> sigmas{0.0, 1.0, 1e6};
  const auto csv = lemma1_csv(pools, sigmas, 1.0, 2);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "sigma,aoc_before,aoc_after,cl_before,cl_after");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0][1], rows[0][2]);
  EXPECT_EQ(rows[0][3], rows[0][4]);
  EXPECT_LT(rows[0][2], rows[1][2]);
  EXPECT_NEAR(rows[2][2], 0.5, 0.05);
  for (const auto& r : rows) EXPECT_NEAR(r[4], rows[0][3], 1e-9);
}

TEST(Lemma2, RandomPoolsHold) {
  const std::vector<double> taus{0.01, 0.1, 1.0};
  const auto s = run_lemma2_check(300, 60, taus, 5);
  EXPECT_EQ(s.trials, 300u);
  EXPECT_EQ(s.violations, 0u);
  EXPECT_FALSE(s.violating_pool.has_value());
  EXPECT_LE(s.max_ratio, 1.0);
  EXPECT_THROW(run_lemma2_check(0, 10, taus, 1), ValidationError);
}

TEST(Pools, LoadJsonl) {
  TempDir dir("pools");
  write_text(dir / "p.jsonl", "{\"positives\":[1,2],\"negatives\":[0]}\n\n{\"positives\":[0.5],\"negatives\":[0.25,0.75]}\n");
  const auto pools = load_query_pools(dir / "p.jsonl");
  ASSERT_EQ(pools.size(), 2u);
  EXPECT_EQ(pools[1].negatives, (std::vector<double>{0.25, 0.75}));
  write_text(dir / "bad.jsonl", "{\"positives\":[1]}\n");
  EXPECT_THROW(load_query_pools(dir / "bad.jsonl"), ValidationError);
}
