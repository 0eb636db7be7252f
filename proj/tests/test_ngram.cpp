#include "xproab/ngram.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "xproab/rng.hpp"

using namespace xproab;

namespace {

std::vector<std::string> toks(std::initializer_list<const char*> words) {
  return {words.begin(), words.end()};
}

}  // namespace

TEST(ContextModel, DocumentCountsOnSmallCorpus) {
  const auto model = ContextModel::build(Corpus::from_lines({"a b", "a c"}), 1);
  EXPECT_EQ(model.count(toks({"a"})), 2u);
  EXPECT_EQ(model.count(toks({"a", "b"})), 1u);
  EXPECT_EQ(model.count(toks({kPadToken})), 2u);
  EXPECT_DOUBLE_EQ(model.epsilon(), 1.0 / 3.0);
}

TEST(ContextModel, RepetitionInsideOneDocumentCountsOnce) {
  const auto model = ContextModel::build(Corpus::from_lines({"a b a b"}), 1);
  EXPECT_EQ(model.count(toks({"a", "b"})), 1u);
  EXPECT_EQ(model.count(toks({"a"})), 1u);
}

TEST(ContextModel, EmptySubsequenceCountsCorpusSize) {
  const auto model =
      ContextModel::build(Corpus::from_lines({"a", "b", "c"}), 1);
  EXPECT_EQ(model.count({}), 3u);
}

TEST(ContextModel, EmptyCorpusRejected) {
  EXPECT_THROW(ContextModel::build(Corpus(), 1), ConfigError);
  EXPECT_THROW(
      ContextModel::build(Corpus::from_lines({"a"}), 0), ConfigError);
}

TEST(PPre, HandComputedConditional) {
  const auto model = ContextModel::build(
      Corpus::from_lines({"the food was good", "the food was bad"}), 1);
  // 1 of the 2 "was"-containing documents contains ("was","good").
  EXPECT_DOUBLE_EQ(model.p_pre("good", toks({"was"})), 0.5);
}

TEST(PPre, UnseenContextFloorsAtEpsilon) {
  const auto model = ContextModel::build(
      Corpus::from_lines({"the food was good", "the food was bad"}), 1);
  EXPECT_DOUBLE_EQ(model.p_pre("good", toks({"zzz"})), model.epsilon());
}

TEST(PPre, ZeroNumeratorFloorsAtEpsilon) {
  const auto model = ContextModel::build(
      Corpus::from_lines({"the food was good", "the food was bad"}), 1);
  // No document starts with "good".
  EXPECT_DOUBLE_EQ(model.p_pre("good", toks({kPadToken})), model.epsilon());
}

TEST(PSuc, HandComputedConditional) {
  const auto model = ContextModel::build(
      Corpus::from_lines({"the food was good", "the food was bad"}), 1);
  // 1 of 2 padded documents contains ("good", <pad>).
  EXPECT_DOUBLE_EQ(model.p_suc("good", toks({kPadToken})), 0.5);
}

TEST(PSuc, MirrorSymmetryOnReversedCorpus) {
  const std::vector<std::string> lines = {"a b c", "c b", "a c a"};
  std::vector<std::string> reversed_lines;
  for (const auto& line : lines) {
    auto t = tokenize(line);
    std::reverse(t.begin(), t.end());
    reversed_lines.push_back(detokenize(t));
  }
  const auto fwd = ContextModel::build(Corpus::from_lines(lines), 1);
  const auto rev = ContextModel::build(Corpus::from_lines(reversed_lines), 1);
  const std::vector<std::string> words = {"a", "b", "c", kPadToken};
  for (const auto& w : words)
    for (const auto& ctx : words)
      EXPECT_DOUBLE_EQ(fwd.p_suc(w, toks({ctx.c_str()})),
                       rev.p_pre(w, toks({ctx.c_str()})));
}

TEST(PSuc, UnseenPairFloorsAtEpsilon) {
  const auto model = ContextModel::build(Corpus::from_lines({"a b"}), 1);
  EXPECT_DOUBLE_EQ(model.p_suc("b", toks({"a"})), model.epsilon());
}

TEST(ContextModel, ProbabilityBounds) {
  Rng rng(3);
  const std::vector<std::string> vocab = {"a", "b", "c", "d"};
  std::vector<std::string> lines;
  for (int i = 0; i < 12; ++i) {
    std::string line;
    const std::size_t len = 1 + rng.below(6);
    for (std::size_t k = 0; k < len; ++k) {
      if (k) line += ' ';
      line += vocab[rng.below(vocab.size())];
    }
    lines.push_back(line);
  }
  const auto model = ContextModel::build(Corpus::from_lines(lines), 1);
  std::vector<std::string> probes = vocab;
  probes.push_back(kPadToken);
  probes.push_back("unseen");
  for (const auto& w : probes) {
    for (const auto& ctx : probes) {
      const std::vector<std::string> c = {ctx};
      for (double p : {model.p_pre(w, c), model.p_suc(w, c)}) {
        EXPECT_GE(p, model.epsilon());
        EXPECT_LE(p, 1.0);
      }
    }
  }
}

TEST(ContextModel, EvidenceMonotonicity) {
  const std::vector<std::string> base = {"x y", "x z", "w y"};
  const auto before = ContextModel::build(Corpus::from_lines(base), 1);
  auto extended = base;
  extended.push_back("x y");  // one more document containing ("x","y")
  const auto after = ContextModel::build(Corpus::from_lines(extended), 1);
  EXPECT_GE(after.p_pre("y", toks({"x"})), before.p_pre("y", toks({"x"})));
  // And on a context that gains only denominator mass the value may drop but
  // never below the new epsilon.
  EXPECT_GE(after.p_pre("z", toks({"x"})), after.epsilon());
}

TEST(ContextModel, DeterministicAcrossDocumentOrder) {
  const std::vector<std::string> lines = {"a b c", "b c d", "d a"};
  std::vector<std::string> shuffled = {"d a", "a b c", "b c d"};
  const auto m1 = ContextModel::build(Corpus::from_lines(lines), 1);
  const auto m2 = ContextModel::build(Corpus::from_lines(shuffled), 1);
  EXPECT_EQ(m1.to_json(), m2.to_json());
}

TEST(ContextModel, JsonRoundTripLossless) {
  const auto model = ContextModel::build(
      Corpus::from_lines({"the food was good", "the food was bad"}), 1);
  const auto j = model.to_json();
  const auto restored = ContextModel::from_json(j);
  EXPECT_EQ(restored.to_json(), j);
  EXPECT_DOUBLE_EQ(restored.p_pre("good", toks({"was"})),
                   model.p_pre("good", toks({"was"})));
}

TEST(ContextModel, ContextLengthContract) {
  const auto model = ContextModel::build(Corpus::from_lines({"a b"}), 1);
  EXPECT_THROW(model.p_pre("a", toks({"a", "b"})), ContractViolation);
  EXPECT_THROW(model.p_suc("a", {}), ContractViolation);
}
