#include "xproab/text.hpp"

#include <gtest/gtest.h>

#include "xproab/rng.hpp"

using namespace xproab;

TEST(Tokenize, WhitespaceSplitLowercase) {
  EXPECT_EQ(tokenize("I love this story"),
            (std::vector<std::string>{"i", "love", "this", "story"}));
}

TEST(Tokenize, EmptyInput) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("   \t\n").empty());
}

TEST(Tokenize, DetachedPunctuation) {
  EXPECT_EQ(tokenize("the desserts were very bland ."),
            (std::vector<std::string>{"the", "desserts", "were", "very",
                                      "bland", "."}));
  EXPECT_EQ(tokenize("Bland."), (std::vector<std::string>{"bland", "."}));
  EXPECT_EQ(tokenize("\"wow!\""),
            (std::vector<std::string>{"\"", "wow", "!", "\""}));
  EXPECT_EQ(tokenize("don't stop"),
            (std::vector<std::string>{"don't", "stop"}));
  EXPECT_EQ(tokenize("..."), (std::vector<std::string>{".", ".", "."}));
}

TEST(Tokenize, PadTokenNeverProduced) {
  for (const auto& t : tokenize("<pad> <PAD> x<pad>y"))
    EXPECT_NE(t, std::string(kPadToken));
}

TEST(Tokenize, DetokenizeRoundTripIdempotent) {
  Rng rng(7);
  const std::vector<std::string> raws = {
      "Hello, World!", "a.b c,d", "  spaced   out  ", "MiXeD CaSe...",
      "unicode caf\xC3\xA9 stays", "1+1=2 (true)", "!!!", "tail."};
  for (const auto& raw : raws) {
    const auto once = tokenize(raw);
    const auto twice = tokenize(detokenize(once));
    EXPECT_EQ(once, twice) << raw;
  }
  // Randomized: arbitrary ASCII strings.
  for (int trial = 0; trial < 200; ++trial) {
    std::string raw;
    const std::size_t len = rng.below(40);
    for (std::size_t i = 0; i < len; ++i)
      raw.push_back(static_cast<char>(32 + rng.below(95)));
    const auto once = tokenize(raw);
    EXPECT_EQ(once, tokenize(detokenize(once))) << raw;
  }
}

TEST(TfIdf, SingleDocumentIdf) {
  const auto model = TfIdfModel::fit(Corpus::from_lines({"a b"}));
  ASSERT_EQ(model.dimension(), 2u);
  // ln(2/2) + 1 = 1.0 for both tokens.
  EXPECT_DOUBLE_EQ(model.idf(model.vocabulary().at("a")), 1.0);
  EXPECT_DOUBLE_EQ(model.idf(model.vocabulary().at("b")), 1.0);
}

TEST(TfIdf, EmptyCorpusRejected) {
  EXPECT_THROW(TfIdfModel::fit(Corpus()), ConfigError);
}

TEST(TfIdf, RefitIsIdentical) {
  const auto corpus = Corpus::from_lines({"a b c", "b c d", "d e"});
  const auto m1 = TfIdfModel::fit(corpus);
  const auto m2 = TfIdfModel::fit(corpus);
  ASSERT_EQ(m1.dimension(), m2.dimension());
  EXPECT_EQ(m1.vocabulary(), m2.vocabulary());
  for (std::size_t i = 0; i < m1.dimension(); ++i)
    EXPECT_EQ(m1.idf(i), m2.idf(i));
}

TEST(TfIdf, VocabularyCoversCorpus) {
  const auto corpus = Corpus::from_lines({"a b c", "b c d !"});
  const auto model = TfIdfModel::fit(corpus);
  for (const auto& doc : corpus.docs())
    for (const auto& t : doc.tokens) EXPECT_TRUE(model.contains(t));
}

TEST(Vectorize, OovOnlyYieldsZeroVector) {
  const auto model = TfIdfModel::fit(Corpus::from_lines({"a b"}));
  const auto v = model.vectorize(Document::from_raw("x y z"));
  EXPECT_TRUE(v.is_zero());
}

TEST(Vectorize, SingleTokenIsUnit) {
  const auto model = TfIdfModel::fit(Corpus::from_lines({"a b", "b c"}));
  const auto v = model.vectorize(Document::from_raw("a"));
  EXPECT_DOUBLE_EQ(v.at(model.vocabulary().at("a")), 1.0);
  EXPECT_NEAR(v.norm(), 1.0, 1e-15);
}

TEST(Vectorize, HandComputedWeights) {
  // idf(a) = idf(b) = 1 on a single-document corpus; "a a b" -> (2,1)/sqrt(5).
  const auto model = TfIdfModel::fit(Corpus::from_lines({"a b"}));
  const auto v = model.vectorize(Document::from_raw("a a b"));
  const double s = std::sqrt(5.0);
  EXPECT_NEAR(v.at(model.vocabulary().at("a")), 2.0 / s, 1e-15);
  EXPECT_NEAR(v.at(model.vocabulary().at("b")), 1.0 / s, 1e-15);
}

TEST(Vectorize, OrderIndependent) {
  const auto model = TfIdfModel::fit(Corpus::from_lines({"a b c d", "c d e"}));
  const auto v1 = model.vectorize(Document::from_raw("a c c e"));
  const auto v2 = model.vectorize(Document::from_raw("e c a c"));
  EXPECT_EQ(v1.entries(), v2.entries());
}

TEST(CosineDistance, SelfAndOrthogonal) {
  SparseVector a(3), b(3);
  a.set(0, 1.0);
  b.set(1, 1.0);
  EXPECT_DOUBLE_EQ(cosine_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(cosine_distance(a, b), 1.0);
}

TEST(CosineDistance, HandValue) {
  SparseVector a(2), b(2);
  a.set(0, 1.0);
  b.set(0, 1.0);
  b.set(1, 1.0);
  EXPECT_NEAR(cosine_distance(a, b), 1.0 - 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(CosineDistance, ZeroVectorConvention) {
  SparseVector zero(2), a(2);
  a.set(0, 2.0);
  EXPECT_DOUBLE_EQ(cosine_distance(zero, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine_distance(zero, zero), 1.0);
}

TEST(CosineDistance, DimensionMismatch) {
  SparseVector a(2), b(3);
  EXPECT_THROW(cosine_distance(a, b), ContractViolation);
}

TEST(CosineDistance, SymmetricProperty) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    SparseVector a(8), b(8);
    for (std::size_t i = 0; i < 8; ++i) {
      if (rng.below(2)) a.set(i, rng.unit() + 0.01);
      if (rng.below(2)) b.set(i, rng.unit() + 0.01);
    }
    EXPECT_DOUBLE_EQ(cosine_distance(a, b), cosine_distance(b, a));
    if (!a.is_zero()) EXPECT_DOUBLE_EQ(cosine_distance(a, a), 0.0);
  }
}

TEST(CosineDistance, CorpusPairwiseReproducible) {
  const auto corpus =
      Corpus::from_lines({"the food was good", "the food was bad",
                          "service was slow", "good service !"});
  const auto m1 = TfIdfModel::fit(corpus);
  const auto m2 = TfIdfModel::fit(corpus);
  const auto v1 = vectorize_corpus(m1, corpus);
  const auto v2 = vectorize_corpus(m2, corpus);
  for (std::size_t i = 0; i < corpus.size(); ++i)
    for (std::size_t j = 0; j < corpus.size(); ++j)
      EXPECT_EQ(cosine_distance(v1[i], v1[j]), cosine_distance(v2[i], v2[j]));
}

TEST(DocumentType, FromTokensReproducesTokenization) {
  const auto doc = Document::from_tokens({"i", "love", "this", "story"});
  EXPECT_EQ(doc.raw, "i love this story");
  EXPECT_EQ(doc.tokens, tokenize(doc.raw));
}
