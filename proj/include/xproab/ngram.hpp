#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "xproab/errors.hpp"
#include "xproab/text.hpp"

namespace xproab {

/// Pads a token sequence with `n` reserved padding tokens on each end.
inline std::vector<std::string> pad_tokens(
    const std::vector<std::string>& tokens, std::size_t n) {
  std::vector<std::string> padded;
  padded.reserve(tokens.size() + 2 * n);
  padded.insert(padded.end(), n, kPadToken);
  padded.insert(padded.end(), tokens.begin(), tokens.end());
  padded.insert(padded.end(), n, kPadToken);
  return padded;
}

/// Document-count statistics of contiguous subsequences over a padded corpus.
/// Counts are the number of corpus texts containing a subsequence at least
/// once, never raw occurrence counts. Queries that would be 0 or 0/0 return
/// the smoothing floor epsilon = 1/(corpus_size+1).
class ContextModel {
 public:
  static ContextModel build(const Corpus& corpus, std::size_t n = 1) {
    if (corpus.empty()) throw ConfigError("build_context_model: empty corpus");
    if (n < 1) throw ConfigError("build_context_model: n must be >= 1");
    ContextModel model;
    model.n_ = n;
    model.corpus_size_ = corpus.size();
    for (const auto& doc : corpus.docs()) {
      const auto padded = pad_tokens(doc.tokens, n);
      std::unordered_set<std::string> seen;
      for (std::size_t len = 1; len <= n + 1; ++len) {
        if (len > padded.size()) break;
        for (std::size_t start = 0; start + len <= padded.size(); ++start) {
          seen.insert(join(std::span(padded).subspan(start, len)));
        }
      }
      for (const auto& key : seen) ++model.counts_[key];
    }
    return model;
  }

  std::size_t order() const { return n_; }
  std::size_t corpus_size() const { return corpus_size_; }
  double epsilon() const { return 1.0 / (corpus_size_ + 1.0); }

  /// Document count of a token subsequence; the empty subsequence is contained
  /// in every document.
  std::uint32_t count(std::span<const std::string> tokens) const {
    if (tokens.empty()) return static_cast<std::uint32_t>(corpus_size_);
    auto it = counts_.find(join(tokens));
    return it == counts_.end() ? 0 : it->second;
  }

  /// P(w | preceding context), Eq.-style conditional estimated by document
  /// counts. `preceding` must have length n (padding-extended by the caller).
  double p_pre(const std::string& word,
               std::span<const std::string> preceding) const {
    if (preceding.size() != n_)
      throw ContractViolation("p_pre: context length must equal n");
    std::vector<std::string> joint(preceding.begin(), preceding.end());
    joint.push_back(word);
    return conditional(count(joint), count(preceding));
  }

  /// P(w | succeeding context); mirror of p_pre with the word prepended.
  double p_suc(const std::string& word,
               std::span<const std::string> succeeding) const {
    if (succeeding.size() != n_)
      throw ContractViolation("p_suc: context length must equal n");
    std::vector<std::string> joint;
    joint.reserve(succeeding.size() + 1);
    joint.push_back(word);
    joint.insert(joint.end(), succeeding.begin(), succeeding.end());
    return conditional(count(joint), count(succeeding));
  }

  /// Lossless persistence. Keys are space-joined token tuples; tokens never
  /// contain spaces, so the join is unambiguous.
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["n"] = n_;
    j["corpus_size"] = corpus_size_;
    std::map<std::string, std::uint32_t> sorted(counts_.begin(), counts_.end());
    j["counts"] = sorted;
    return j;
  }

  static ContextModel from_json(const nlohmann::json& j) {
    ContextModel model;
    model.n_ = j.at("n").get<std::size_t>();
    model.corpus_size_ = j.at("corpus_size").get<std::size_t>();
    for (const auto& [key, value] : j.at("counts").items())
      model.counts_[key] = value.get<std::uint32_t>();
    return model;
  }

 private:
  double conditional(std::uint32_t numerator, std::uint32_t denominator) const {
    if (denominator == 0 || numerator == 0) return epsilon();
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }

  static std::string join(std::span<const std::string> tokens) {
    std::string key;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i > 0) key.push_back(' ');
      key += tokens[i];
    }
    return key;
  }

  std::size_t n_ = 1;
  std::size_t corpus_size_ = 0;
  std::unordered_map<std::string, std::uint32_t> counts_;
};

}  // namespace xproab
