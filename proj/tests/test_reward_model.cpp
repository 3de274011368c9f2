#include "sumreward/reward_model.hpp"

#include "sumreward/eval.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sumreward;
using namespace sumreward::reward;

namespace {

const testkit::SyntheticCorpus& synthetic() {
  static const testkit::SyntheticCorpus c = testkit::make_synthetic_corpus();
  return c;
}

double held_out_spearman(const RewardModel& model, const corpus::Dataset& ds,
                         const embeddings::TextEncoder& enc, const std::vector<std::string>& ids) {
  std::vector<double> pred, gold;
  for (const auto& id : ids) {
    const auto& a = ds.article(id);
    for (const auto& s : a.summaries) {
      pred.push_back(score(model, enc, a.article_text, s.text));
      gold.push_back(s.avg_rating);
    }
  }
  return eval::spearman(pred, gold);
}

corpus::Dataset toy_pair() {
  corpus::Dataset ds;
  ds.articles.push_back({"a", "W1 w2 w3. W4 w5 w6.", {{"s0", "W1 w2 w3.", {0.8}, 0.8}, {"s1", "W4 w5 w6.", {-0.2}, -0.2}}});
  return ds;
}

}  // namespace

TEST(TrainConfig, RejectsNonPositiveValues) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.epochs = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.learning_rate = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(parse_loss("mse"), LossKind::mse);
  EXPECT_EQ(parse_loss("preference"), LossKind::preference);
  EXPECT_THROW(parse_loss("hinge"), std::invalid_argument);
}

TEST(Training, PreferenceLossLearnsTheSyntheticRating) {
  const auto& c = synthetic();
  const auto enc = c.encoder();
  const auto folds = corpus::split_folds(c.dataset, 5, 1);
  const auto trained = train_reward_model(c.dataset, folds[0], enc, TrainConfig{});
  EXPECT_GE(held_out_spearman(trained.model, c.dataset, enc, folds[0].test_ids), 0.8);
  EXPECT_FALSE(trained.report.train_loss.empty());
  EXPECT_EQ(trained.report.val_spearman.size(), static_cast<std::size_t>(trained.report.epochs_run));
  EXPECT_GE(trained.report.best_epoch, 0);
  ASSERT_TRUE(trained.model.normalization.has_value());
  EXPECT_LE(trained.model.normalization->min, trained.model.normalization->max);
}

TEST(Training, SingleSeparablePairConverges) {
  testkit::TempDir dir;
  testkit::write_file(dir / "v.txt", "w1 1 0\nw2 0 1\nw3 1 1\nw4 -1 0\nw5 0 -1\nw6 -1 -1\n");
  const auto enc = embeddings::PMeansEncoder::from_file(dir / "v.txt", {});
  const auto ds = toy_pair();
  const corpus::FoldSplit split{0, {"a"}, {}, {}};
  TrainConfig cfg;
  cfg.epochs = 500;
  const auto trained = train_reward_model(ds, split, enc, cfg);
  const auto& loss = trained.report.train_loss;
  ASSERT_EQ(loss.size(), 500u);
  for (std::size_t i = 1; i < loss.size(); ++i) EXPECT_LE(loss[i], loss[i - 1]) << "step " << i;
  const double final_loss = preference_nll(score(trained.model, enc, ds.articles[0].article_text, "W1 w2 w3."),
                                           score(trained.model, enc, ds.articles[0].article_text, "W4 w5 w6."));
  EXPECT_LT(final_loss, 0.01);
}

TEST(Training, SameSeedIsBitIdentical) {
  testkit::SyntheticOptions o;
  o.articles = 30;
  const auto c = testkit::make_synthetic_corpus(o);
  const auto enc = c.encoder();
  const auto split = corpus::split_folds(c.dataset, 5, 0)[0];
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 99;
  for (const auto loss : {LossKind::mse, LossKind::preference}) {
    cfg.loss = loss;
    const auto a = train_reward_model(c.dataset, split, enc, cfg);
    const auto b = train_reward_model(c.dataset, split, enc, cfg);
    EXPECT_EQ(flatten(a.model.params), flatten(b.model.params));
    EXPECT_EQ(a.report.train_loss, b.report.train_loss);
  }
}

TEST(Training, Errors) {
  testkit::SyntheticOptions o;
  o.articles = 5;
  const auto c = testkit::make_synthetic_corpus(o);
  const auto enc = c.encoder();
  EXPECT_THROW(train_reward_model(c.dataset, {0, {}, {"a0"}, {"a1"}}, enc, TrainConfig{}), std::invalid_argument);
  corpus::Dataset tied = c.dataset;
  for (auto& a : tied.articles) {
    for (auto& s : a.summaries) s.avg_rating = 0.25, s.ratings = {0.25};
  }
  EXPECT_THROW(train_reward_model(tied, {0, {"a0", "a1"}, {}, {}}, enc, TrainConfig{}), std::invalid_argument);
  TrainConfig mse;
  mse.loss = LossKind::mse;
  mse.epochs = 1;
  EXPECT_NO_THROW(train_reward_model(tied, {0, {"a0", "a1"}, {}, {}}, enc, mse));
}

TEST(Scoring, PureAndConstantModels) {
  const auto& c = synthetic();
  const auto enc = c.encoder();
  RewardModel zero{MLPParams::zeros(2 * enc.dim(), 4), enc.spec(), std::nullopt};
  const auto& a = c.dataset.articles[0];
  EXPECT_EQ(score(zero, enc, a.article_text, a.summaries[0].text), 0.0);
  Rng rng(61);
  RewardModel random{MLPParams::initialize(2 * enc.dim(), 4, rng), enc.spec(), std::nullopt};
  EXPECT_EQ(score(random, enc, a.article_text, a.summaries[1].text),
            score(random, enc, a.article_text, a.summaries[1].text));
}

TEST(Scoring, EncoderMismatchRejected) {
  const auto& c = synthetic();
  const auto enc = c.encoder();
  RewardModel m{MLPParams::zeros(2 * enc.dim(), 2), enc.spec(), std::nullopt};
  m.encoder_spec.resource_sha256 = "different";
  EXPECT_THROW(score(m, enc, "A.", "B."), DataError);
  m = {MLPParams::zeros(2 * enc.dim(), 2), enc.spec(), std::nullopt};
  m.encoder_spec.p_values = {1.0};
  EXPECT_THROW(score(m, enc, "A.", "B."), DataError);
  m = {MLPParams::zeros(2 * enc.dim(), 2), enc.spec(), std::nullopt};
  m.encoder_spec.dim += 1;
  EXPECT_THROW(score(m, enc, "A.", "B."), DataError);
}

TEST(ModelFile, RoundTripIsBitFaithful) {
  testkit::TempDir dir;
  Rng rng(62);
  for (int trial = 0; trial < 10; ++trial) {
    RewardModel m;
    m.params = MLPParams::initialize(6, 3, rng);
    m.params.b1 = testkit::random_vector(rng, 3, 1e-300);
    m.params.b2 = rng.normal() * 1e10;
    m.encoder_spec = {"pmeans", {-INFINITY, INFINITY, 1, 2}, "abc", 3};
    if (trial % 2) m.normalization = ScoreRange{rng.normal(), 1.0 / 3.0};
    save_model(dir / "m.json", m);
    const auto back = load_model(dir / "m.json");
    EXPECT_EQ(flatten(back.params), flatten(m.params));
    EXPECT_EQ(back.encoder_spec, m.encoder_spec);
    ASSERT_EQ(back.normalization.has_value(), m.normalization.has_value());
    if (m.normalization) {
      EXPECT_EQ(back.normalization->min, m.normalization->min);
      EXPECT_EQ(back.normalization->max, m.normalization->max);
    }
  }
}

TEST(ModelFile, CorruptFilesAreDataErrors) {
  testkit::TempDir dir;
  testkit::write_file(dir / "bad.json", "{\"version\": 1}");
  EXPECT_THROW(load_model(dir / "bad.json"), DataError);
  testkit::write_file(dir / "junk.json", "not json");
  EXPECT_THROW(load_model(dir / "junk.json"), DataError);
  EXPECT_THROW(load_model(dir / "missing.json"), DataError);
}
