#pragma once

// Shared fixtures for the test suites: planted-keyword corpora and a
// function-backed classifier for exactly controlled black boxes.

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "xproab/blackbox.hpp"
#include "xproab/rng.hpp"
#include "xproab/text.hpp"

namespace testing_support {

/// Classifier driven by an arbitrary deterministic score function.
class FunctionClassifier : public xproab::Classifier {
 public:
  explicit FunctionClassifier(std::function<double(const std::string&)> fn,
                              std::string kind = "function")
      : fn_(std::move(fn)), kind_(std::move(kind)) {}

  std::vector<double> score_batch(
      const std::vector<std::string>& texts) override {
    std::vector<double> scores;
    scores.reserve(texts.size());
    for (const auto& t : texts) scores.push_back(fn_(t));
    return scores;
  }

  std::string kind() const override { return kind_; }

 private:
  std::function<double(const std::string&)> fn_;
  std::string kind_;
};

inline bool contains_token(const std::string& text, const std::string& token) {
  const auto tokens = xproab::tokenize(text);
  return std::find(tokens.begin(), tokens.end(), token) != tokens.end();
}

/// score = clip(0.5 + 0.4*[has positive keyword] - 0.4*[has negative keyword]).
inline std::unique_ptr<xproab::Classifier> keyword_classifier(
    std::string positive = "good", std::string negative = "bad") {
  return std::make_unique<FunctionClassifier>(
      [positive, negative](const std::string& text) {
        double s = 0.5;
        if (contains_token(text, positive)) s += 0.4;
        if (contains_token(text, negative)) s -= 0.4;
        return std::clamp(s, 0.0, 1.0);
      },
      "keyword");
}

inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {
      "the", "a",  "this", "that",  "meal",  "movie", "story",
      "day", "it", "was",  "very",  "quite", "thing", "time",
      "we",  "i",  "saw",  "tried", "found", "again"};
  return words;
}

/// Sentences of 3-8 filler words with one planted keyword ("good" or "bad")
/// at a random position; label = 1 iff the keyword is "good".
inline xproab::LabeledDataset planted_dataset(std::size_t size,
                                              std::uint64_t seed) {
  xproab::Rng rng(seed);
  const auto& fillers = filler_words();
  xproab::LabeledDataset data;
  for (std::size_t i = 0; i < size; ++i) {
    const int label = static_cast<int>(i % 2);
    const std::string keyword = label == 1 ? "good" : "bad";
    const std::size_t len = 3 + rng.below(6);
    std::vector<std::string> tokens;
    for (std::size_t k = 0; k < len; ++k)
      tokens.push_back(fillers[rng.below(fillers.size())]);
    tokens.insert(tokens.begin() + rng.below(tokens.size() + 1), keyword);
    data.docs.push_back(xproab::Document::from_tokens(tokens));
    data.labels.push_back(label);
  }
  return data;
}

inline xproab::Corpus planted_corpus(std::size_t size, std::uint64_t seed) {
  const auto data = planted_dataset(size, seed);
  return xproab::Corpus(data.docs, xproab::CorpusRole::prototypes);
}

}  // namespace testing_support
