#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "xproab/blackbox.hpp"
#include "xproab/errors.hpp"
#include "xproab/neighborhood.hpp"
#include "xproab/ngram.hpp"
#include "xproab/rng.hpp"
#include "xproab/text.hpp"

namespace xproab {

/// One word placement on a prototype of l+1 tokens: an insertion at `begin`
/// when begin == end, otherwise a replacement of tokens [begin, end).
struct EditOperation {
  std::size_t begin = 0;  // i in [0, l+1]
  std::size_t end = 0;    // j in [i, l+1]
  double objective = 0.0; // e^{-(j-i)} * p_pre * p_suc on the padded prototype

  bool is_insertion() const { return begin == end; }
  std::size_t span() const { return end - begin; }
};

struct PrototypeEntry {
  Document doc;
  Prediction prediction;
  double distance = 0.0;  // tf-idf cosine distance to the query
};

/// Counterfactual corpus texts ordered by closeness to the query.
struct PrototypeSet {
  std::vector<PrototypeEntry> entries;
  bool shortage = false;  // fewer counterfactuals than requested
};

/// The k counterfactual corpus texts closest to the query under tf-idf cosine
/// distance. `corpus_vectors` must be vectorize_corpus(tfidf, corpus).
inline PrototypeSet select_prototypes(const Document& query,
                                      const Corpus& corpus,
                                      const std::vector<SparseVector>& corpus_vectors,
                                      const TfIdfModel& tfidf, BlackBox& blackbox,
                                      std::size_t k) {
  if (k < 1) throw ConfigError("select_prototypes: k must be >= 1");
  if (corpus.empty()) throw ConfigError("select_prototypes: empty corpus");

  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& doc : corpus.docs()) texts.push_back(doc.raw);
  const auto predictions = blackbox.predict_batch(texts);
  const auto anchor = blackbox.predict(query.raw);
  const auto query_vec = tfidf.vectorize(query);

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (predictions[i].label != anchor.label) candidates.push_back(i);
  if (candidates.empty())
    throw NoCounterfactualsError(
        "the corpus contains no counterfactual to the query");

  std::vector<double> distances(corpus.size(), 0.0);
  for (std::size_t i : candidates)
    distances[i] = cosine_distance(query_vec, corpus_vectors[i]);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) {
                     return distances[a] < distances[b];
                   });

  PrototypeSet set;
  set.shortage = candidates.size() < k;
  const std::size_t take = std::min(k, candidates.size());
  set.entries.reserve(take);
  for (std::size_t r = 0; r < take; ++r) {
    const std::size_t i = candidates[r];
    set.entries.push_back({corpus[i], predictions[i], distances[i]});
  }
  return set;
}

/// Exhaustively scores every (i, j) placement of `word` on the prototype and
/// returns the objective maximizer. Ties go to the smaller edited span, then
/// to the leftmost position.
inline EditOperation best_edition(const std::vector<std::string>& prototype,
                                  const std::string& word,
                                  const ContextModel& context) {
  const std::size_t n = context.order();
  const std::size_t len = prototype.size();  // l + 1
  const auto padded = pad_tokens(prototype, n);

  EditOperation best;
  bool first = true;
  for (std::size_t i = 0; i <= len; ++i) {
    // Preceding context: the n tokens before position i (padded index i+n).
    const std::span<const std::string> pre(padded.data() + i, n);
    const double p_pre = context.p_pre(word, pre);
    for (std::size_t j = i; j <= len; ++j) {
      const std::span<const std::string> suc(padded.data() + j + n, n);
      const double p_suc = context.p_suc(word, suc);
      const double objective =
          std::exp(-static_cast<double>(j - i)) * p_pre * p_suc;
      const std::size_t span = j - i;
      const bool better =
          first || objective > best.objective ||
          (objective == best.objective &&
           (span < best.span() || (span == best.span() && i < best.begin)));
      if (better) {
        best = {i, j, objective};
        first = false;
      }
    }
  }
  return best;
}

/// Splices `word` into the prototype as described by the operation.
inline Document apply_edition(const std::vector<std::string>& prototype,
                              const EditOperation& op, const std::string& word) {
  if (op.begin > op.end || op.end > prototype.size())
    throw ContractViolation("apply_edition: operation out of range");
  std::vector<std::string> tokens;
  tokens.reserve(prototype.size() + 1 - op.span());
  tokens.insert(tokens.end(), prototype.begin(), prototype.begin() + op.begin);
  tokens.push_back(word);
  tokens.insert(tokens.end(), prototype.begin() + op.end, prototype.end());
  return Document::from_tokens(tokens);
}

struct XprobConfig {
  std::size_t prototype_count = 80;   // k
  std::size_t max_neighborhood = 400; // p
  std::size_t context_width = 1;      // n
  std::size_t max_rounds = 50;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::map<std::string, std::size_t> token_bag(
    const std::vector<std::string>& tokens) {
  std::map<std::string, std::size_t> bag;
  for (const auto& t : tokens) ++bag[t];
  return bag;
}

}  // namespace detail

/// Iterative probability-based edition: every round edits randomly drawn pool
/// prototypes with each query word, the chosen variants become the next pool,
/// and all chosen variants accumulate into the neighborhood until it reaches
/// `max_neighborhood` or the round cap.
inline Neighborhood construct_neighborhood_xprob(
    const Document& query, const Corpus& corpus,
    const std::vector<SparseVector>& corpus_vectors, const TfIdfModel& tfidf,
    const ContextModel& context, BlackBox& blackbox, const XprobConfig& config) {
  if (query.tokens.empty())
    throw ConfigError("construct_neighborhood_xprob: query has no tokens");

  Neighborhood out;
  out.query = query;
  out.query_prediction = blackbox.predict(query.raw);
  out.method = "xprob";

  const auto prototypes =
      select_prototypes(query, corpus, corpus_vectors, tfidf, blackbox,
                        config.prototype_count);
  if (prototypes.shortage) out.add_flag(flag::kPrototypeShortage);

  std::vector<Document> pool;
  pool.reserve(prototypes.entries.size());
  for (const auto& e : prototypes.entries) pool.push_back(e.doc);

  Rng rng(config.seed);
  const auto query_bag = detail::token_bag(query.tokens);
  const std::size_t quota =
      (config.prototype_count + query.tokens.size() - 1) / query.tokens.size();

  std::vector<Document> accepted;  // neighborhood members, insertion order
  std::unordered_set<std::string> accepted_texts;
  auto try_accept = [&](const Document& variant) {
    if (accepted.size() >= config.max_neighborhood) return;
    if (detail::token_bag(variant.tokens) == query_bag) return;
    const std::string key = variant.canonical();
    if (accepted_texts.count(key)) return;
    accepted_texts.insert(key);
    accepted.push_back(variant);
  };

  while (accepted.size() < config.max_neighborhood &&
         out.rounds < config.max_rounds) {
    ++out.rounds;
    std::vector<Document> next_pool;
    std::unordered_set<std::string> next_pool_texts;
    std::vector<Document> surplus;  // extra editions kept as pool complements
    auto pool_insert = [&](const Document& variant) {
      const std::string key = variant.canonical();
      if (next_pool_texts.count(key)) return;
      next_pool_texts.insert(key);
      next_pool.push_back(variant);
    };

    for (const auto& word : query.tokens) {
      const auto order = rng.permutation(pool.size());
      std::size_t produced = 0;
      for (std::size_t idx : order) {
        const auto& prototype = pool[idx].tokens;
        const auto variant =
            apply_edition(prototype, best_edition(prototype, word, context),
                          word);
        if (produced < quota) {
          ++produced;
          pool_insert(variant);
          try_accept(variant);
        } else {
          surplus.push_back(variant);
        }
      }
      // Small pools are re-drawn with replacement once exhausted.
      while (produced < quota) {
        const auto& prototype = pool[rng.below(pool.size())].tokens;
        const auto variant =
            apply_edition(prototype, best_edition(prototype, word, context),
                          word);
        ++produced;
        pool_insert(variant);
        try_accept(variant);
      }
    }

    if (next_pool.size() < config.prototype_count && !surplus.empty()) {
      const auto order = rng.permutation(surplus.size());
      bool refilled = false;
      for (std::size_t idx : order) {
        if (next_pool.size() >= config.prototype_count) break;
        const std::string key = surplus[idx].canonical();
        if (next_pool_texts.count(key)) continue;
        next_pool_texts.insert(key);
        next_pool.push_back(surplus[idx]);
        refilled = true;
      }
      if (refilled) out.add_flag(flag::kPoolRefilled);
    }
    pool = std::move(next_pool);
  }

  if (accepted.size() < config.max_neighborhood)
    out.add_flag(flag::kTruncated);

  std::vector<std::string> texts;
  texts.reserve(accepted.size());
  for (const auto& doc : accepted) texts.push_back(doc.raw);
  const auto predictions = blackbox.predict_batch(texts);
  const auto query_vec = tfidf.vectorize(query);
  out.members.reserve(accepted.size());
  for (std::size_t i = 0; i < accepted.size(); ++i) {
    const double d = cosine_distance(query_vec, tfidf.vectorize(accepted[i]));
    out.members.push_back({std::move(accepted[i]), predictions[i], d});
  }
  out.tally_classes();
  if (!out.members.empty() &&
      (out.class_counts[0] == 0 || out.class_counts[1] == 0))
    out.add_flag(flag::kSingleClassNeighborhood);
  return out;
}

}  // namespace xproab
