#include "xproab/blackbox.hpp"

#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace xproab;

namespace {

LabeledDataset tiny_dataset() {
  LabeledDataset data;
  data.docs = {Document::from_raw("good"), Document::from_raw("bad")};
  data.labels = {1, 0};
  return data;
}

}  // namespace

TEST(NaiveBayes, HandComputedPosterior) {
  BlackBox bb(train_builtin(tiny_dataset(), "nb"));
  const auto p = bb.predict("good");
  EXPECT_EQ(p.label, 1);
  // Priors 1/2 each; P(good|1) = 2/3, P(good|0) = 1/3 -> posterior 2/3.
  EXPECT_NEAR(p.score_positive, 2.0 / 3.0, 1e-12);
}

TEST(NaiveBayes, UnseenTokensScoreAtPrior) {
  LabeledDataset data;
  data.docs = {Document::from_raw("good"), Document::from_raw("nice"),
               Document::from_raw("bad")};
  data.labels = {1, 1, 0};
  BlackBox bb(train_builtin(data, "nb"));
  EXPECT_NEAR(bb.predict("zzz qqq").score_positive, 2.0 / 3.0, 1e-12);
}

TEST(NaiveBayes, DeterministicPredictions) {
  BlackBox bb(train_builtin(tiny_dataset(), "nb"));
  const auto a = bb.predict("good bad good");
  const auto b = bb.predict("good bad good");
  EXPECT_EQ(a, b);
}

TEST(TrainBuiltin, SingleClassRejected) {
  LabeledDataset data;
  data.docs = {Document::from_raw("good"), Document::from_raw("fine")};
  data.labels = {1, 1};
  EXPECT_THROW(train_builtin(data, "nb"), ConfigError);
  EXPECT_THROW(train_builtin(data, "linear"), ConfigError);
}

TEST(TrainBuiltin, UnknownKindRejected) {
  EXPECT_THROW(train_builtin(tiny_dataset(), "bogus"), ConfigError);
}

TEST(Cache, HitSkipsModelCall) {
  BlackBox bb(train_builtin(tiny_dataset(), "nb"));
  EXPECT_EQ(bb.model_calls(), 0u);
  bb.predict("good day");
  EXPECT_EQ(bb.model_calls(), 1u);
  bb.predict("good day");
  EXPECT_EQ(bb.model_calls(), 1u);
  bb.predict_batch({"good day", "bad day", "bad day"});
  EXPECT_EQ(bb.model_calls(), 2u);
}

TEST(Cache, TransparentAgainstUncachedHandle) {
  const std::vector<std::string> texts = {"good",     "bad",  "good bad",
                                          "bad good", "good", "unrelated"};
  BlackBox cached(train_builtin(tiny_dataset(), "nb"));
  std::vector<Prediction> got;
  for (const auto& t : texts) got.push_back(cached.predict(t));
  for (std::size_t i = 0; i < texts.size(); ++i) {
    BlackBox fresh(train_builtin(tiny_dataset(), "nb"));
    EXPECT_EQ(fresh.predict(texts[i]), got[i]) << texts[i];
  }
}

TEST(Predict, BatchPreservesOrder) {
  BlackBox bb(train_builtin(tiny_dataset(), "nb"));
  const std::vector<std::string> texts = {"bad", "good", "good good", "bad"};
  const auto batch = bb.predict_batch(texts);
  ASSERT_EQ(batch.size(), texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i)
    EXPECT_EQ(batch[i], bb.predict(texts[i]));
}

TEST(Predict, LabelConfidenceConsistency) {
  BlackBox bb(train_builtin(tiny_dataset(), "nb"));
  for (const auto& t :
       {"good", "bad", "good bad", "neutral words", "good good bad"}) {
    const auto p = bb.predict(t);
    EXPECT_GE(p.score_positive, 0.0);
    EXPECT_LE(p.score_positive, 1.0);
    EXPECT_EQ(p.label, p.score_positive >= 0.5 ? 1 : 0);
    EXPECT_GE(p.confidence(), 0.5);
    EXPECT_DOUBLE_EQ(p.confidence(),
                     std::max(p.score_positive, 1.0 - p.score_positive));
  }
}

TEST(Builtin, PlantedKeywordAccuracy) {
  const auto data = testing_support::planted_dataset(400, 104729);
  for (const char* kind : {"nb", "linear"}) {
    BlackBox bb(train_builtin(data, kind));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (bb.predict(data.docs[i].raw).label == data.labels[i]) ++correct;
    EXPECT_GE(static_cast<double>(correct) / data.size(), 0.95) << kind;
  }
}

TEST(Builtin, LinearSeparableTrainingInstanceConfident) {
  LabeledDataset data;
  data.docs = {Document::from_raw("great movie"),
               Document::from_raw("awful movie"),
               Document::from_raw("great plot"),
               Document::from_raw("awful plot")};
  data.labels = {1, 0, 1, 0};
  BlackBox bb(train_builtin(data, "linear"));
  EXPECT_GT(bb.predict("great movie").confidence(), 0.5);
  EXPECT_EQ(bb.predict("great movie").label, 1);
  EXPECT_EQ(bb.predict("awful plot").label, 0);
}

TEST(IsCounterfactual, Definition) {
  BlackBox bb(train_builtin(tiny_dataset(), "nb"));
  const auto anchor = bb.predict("good good");
  EXPECT_FALSE(is_counterfactual(bb, "good", anchor));
  EXPECT_TRUE(is_counterfactual(bb, "bad", anchor));
  EXPECT_FALSE(is_counterfactual(bb, "good good", anchor));
}

TEST(Persistence, RoundTripPreservesPredictions) {
  const auto data = testing_support::planted_dataset(60, 31);
  for (const char* kind : {"nb", "linear"}) {
    auto model = train_builtin(data, kind);
    const auto j = model_to_json(*model);
    EXPECT_EQ(j.at("kind").get<std::string>(), kind);
    auto restored = model_from_json(nlohmann::json::parse(j.dump()));
    BlackBox original(std::move(model)), copy(std::move(restored));
    for (const auto& text : {"good stuff", "bad stuff", "nothing known"})
      EXPECT_EQ(original.predict(text), copy.predict(text)) << kind;
  }
}
