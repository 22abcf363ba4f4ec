#include <gtest/gtest.h>

#include "mwlab/error.hpp"
#include "mwlab/io.hpp"
#include "mwlab/synthetic.hpp"
#include "mwlab/trainer.hpp"
#include "test_support.hpp"

using namespace mwlab;
using mwlab::testing::TempDir;

namespace {

// One topic per document and no filler words: a query shares words with its
// positive and with nothing else, so the data is separable.
struct Fixture {
  SyntheticData data;
  QuerySplit split;
  TrainConfig config;
};

Fixture make_fixture(LossKind loss, std::size_t max_epochs) {
  SyntheticSpec spec;
  spec.n_queries = 240;
  spec.n_docs = 480;
  spec.n_topics = 480;
  spec.doc_filler_words = 0;
  spec.max_query_filler = 0;
  spec.seed = 3;
  Fixture f{make_synthetic(spec), {}, {}};
  f.config.loss = loss;
  f.config.batch_size = 16;
  f.config.hard_negatives = 2;
  f.config.tau = 0.05;
  f.config.base_lr = 5e-3;
  f.config.warmup_steps = 20;
  f.config.max_epochs = max_epochs;
  f.config.patience = 3;
  f.config.eval_every = 50;
  f.config.eval_top_k = 100;
  f.config.hash_dim = 1 << 14;
  f.config.embed_dim = 16;
  f.config.proj_dim = 8;
  f.config.seed = 11;
  const auto init = init_params(f.config.encoder_config());
  f.data.queries =
      mine_hard_negatives(f.data.queries, f.data.corpus,
                          encoder_scores(init, f.data.queries, f.data.corpus), 10)
          .queries;
  f.split = split_queries(f.data.queries, {0.8, 0.1, 1});
  return f;
}

}  // namespace

TEST(Schedule, Warmup) {
  TrainConfig c;
  EXPECT_NEAR(lr_at(250, c), 1.5e-5, 1e-20);
  EXPECT_EQ(lr_at(500, c), 3e-5);
  EXPECT_EQ(lr_at(9000, c), 3e-5);
  c.warmup_steps = 0;
  EXPECT_EQ(lr_at(1, c), 3e-5);
}

TEST(Adam, ZeroGradsLeaveParamsAndDecayMoments) {
  auto p = init_params({16, 2, 2, 1});
  const auto before = p;
  auto st = OptimizerState::for_params(p);
  auto g = ParamGrads::zeros_like(p);
  g.projection(0, 0) = 1.0;
  adam_step(p, g, st, 0.1);
  const double m1 = st.m.projection(0, 0);
  g.zero();
  const auto mid = p;
  adam_step(p, g, st, 0.1);
  EXPECT_LT(std::abs(st.m.projection(0, 0)), std::abs(m1));
  EXPECT_EQ(p.embedding, before.embedding);
  // Zero gradient still moves along the remaining momentum; the untouched
  // entries stay put.
  EXPECT_EQ(p.projection(1, 1), mid.projection(1, 1));
}

TEST(Adam, ConstantGradientStepApproachesLr) {
  auto p = init_params({16, 1, 1, 1});
  auto st = OptimizerState::for_params(p);
  auto g = ParamGrads::zeros_like(p);
  double last = 0.0;
  for (int i = 0; i < 1000; ++i) {
    g.projection(0, 0) = 0.37;
    const double x = p.projection(0, 0);
    adam_step(p, g, st, 1e-3);
    last = x - p.projection(0, 0);
  }
  EXPECT_NEAR(last, 1e-3, 1e-5);
}

TEST(Adam, RejectsNonFiniteGradient) {
  auto p = init_params({16, 2, 2, 1});
  auto st = OptimizerState::for_params(p);
  auto g = ParamGrads::zeros_like(p);
  g.embedding(3, 1) = std::nan("");
  EXPECT_THROW(adam_step(p, g, st, 0.1), NumericError);
}

TEST(Config, ParseRoundTripAndErrors) {
  const auto c = parse_train_config(R"({"loss":"cl","batch_size":8,"tau":0.1,"seed":5})");
  EXPECT_EQ(c.loss, LossKind::cl);
  EXPECT_EQ(c.batch_size, 8u);
  EXPECT_EQ(c.seed, 5u);
  const auto back = parse_train_config(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(parse_train_config(R"({"loss":"triplet"})"), ValidationError);
  EXPECT_THROW(parse_train_config(R"({"learning_rate":1})"), ValidationError);
  EXPECT_THROW(parse_train_config("{"), ValidationError);
  TrainConfig bad;
  bad.batch_size = 1;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Train, ZeroEpochsReturnsInit) {
  auto f = make_fixture(LossKind::mw, 0);
  const auto r = train(f.config, f.split.train, f.split.eval, f.data.corpus);
  EXPECT_EQ(r.best, init_params(f.config.encoder_config()));
  EXPECT_TRUE(r.report.steps.empty());
  EXPECT_EQ(r.report.best_checkpoint_step, 0u);
}

TEST(Train, MwSeparatesSeparableData) {
  auto f = make_fixture(LossKind::mw, 200);
  f.config.max_steps = 2000;
  const auto r = train(f.config, f.split.train, f.split.eval, f.data.corpus);
  const auto m = evaluate(r.best, f.split.test, f.data.corpus, f.config.eval_top_k);
  EXPECT_GT(m.auc, 0.95);
  EXPECT_FALSE(r.report.evals.empty());
  EXPECT_EQ(r.report.evals.front().step, 0u);
}

TEST(Train, RepeatRunIsIdentical) {
  auto f = make_fixture(LossKind::cl, 3);
  TempDir a("run_a"), b("run_b");
  const auto r1 = train(f.config, f.split.train, f.split.eval, f.data.corpus, {a / "ck"});
  const auto r2 = train(f.config, f.split.train, f.split.eval, f.data.corpus, {b / "ck"});
  EXPECT_EQ(r1.best, r2.best);
  write_run_report(a.path(), r1.report);
  write_run_report(b.path(), r2.report);
  for (const char* name : {"report.json", "steps.csv", "evals.csv"}) {
    EXPECT_EQ(read_lines(a / name), read_lines(b / name)) << name;
  }
  EXPECT_EQ(read_lines(a / "steps.csv").front(), "step,train_loss,lr");
  EXPECT_EQ(read_lines(a / "evals.csv").front(), "step,eval_loss,auc,mrr10,ndcg10");
  EXPECT_TRUE(std::filesystem::exists(a / ("ck/ckpt_" + std::to_string(r1.report.best_checkpoint_step))));
}

TEST(Train, EarlyStoppingRespectsPatience) {
  auto f = make_fixture(LossKind::cl, 200);
  f.config.eval_every = 5;
  f.config.patience = 1;
  f.config.base_lr = 0.5;  // overshoots, so the eval loss stops improving quickly
  f.config.warmup_steps = 0;
  const auto r = train(f.config, f.split.train, f.split.eval, f.data.corpus);
  EXPECT_TRUE(r.report.stopped_early);
  EXPECT_LT(r.report.steps_run, 200u * (f.split.train.size() / 16));
}

TEST(Ablation, SingleCellMatchesDirectRun) {
  auto f = make_fixture(LossKind::mw, 2);
  const AblationGrid grid{{f.config.base_lr}, {f.config.batch_size}, {f.config.hard_negatives}};
  const auto rows =
      ablation_sweep(grid, f.config, f.split.train, f.split.eval, f.split.test, f.data.corpus);
  ASSERT_EQ(rows.size(), 1u);
  const auto r = train(f.config, f.split.train, f.split.eval, f.data.corpus);
  const auto m = evaluate(r.best, f.split.test, f.data.corpus, f.config.eval_top_k);
  EXPECT_EQ(rows[0].auc, m.auc);
  EXPECT_EQ(rows[0].mrr, m.mrr10);
  EXPECT_EQ(ablation_csv(rows).substr(0, 62),
            "lr,batch_size,hard_negative,precision@10,recall@1,MRR,nDCG@10,");
  EXPECT_THROW(ablation_sweep({}, f.config, f.split.train, f.split.eval, f.split.test, f.data.corpus),
               ValidationError);
}
