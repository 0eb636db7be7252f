#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xproab/blackbox.hpp"
#include "xproab/errors.hpp"
#include "xproab/generator.hpp"
#include "xproab/neighborhood.hpp"
#include "xproab/rng.hpp"
#include "xproab/text.hpp"

namespace xproab {

/// Latent interpolation: s+1 points marching from `from` toward `to`,
/// z_i = from + i * (to - from) / (s + 1) for i = 0..s. The `outward` flag
/// flips the direction term to (from - to), extrapolating away from `to`.
inline std::vector<LatentPoint> interpolate(const LatentPoint& from,
                                            const LatentPoint& to,
                                            std::size_t steps,
                                            bool outward = false) {
  if (from.size() != to.size())
    throw ContractViolation("interpolate: dimension mismatch");
  std::vector<LatentPoint> points;
  points.reserve(steps + 1);
  const double denom = static_cast<double>(steps) + 1.0;
  for (std::size_t i = 0; i <= steps; ++i) {
    LatentPoint z(from.size());
    const double t = static_cast<double>(i) / denom;
    for (std::size_t d = 0; d < from.size(); ++d) {
      const double direction = outward ? from[d] - to[d] : to[d] - from[d];
      z[d] = from[d] + t * direction;
    }
    points.push_back(std::move(z));
  }
  return points;
}

/// A counterfactual anchor delimiting the interpolation frontier.
struct Landmark {
  LatentPoint point;
  std::string text;
  Prediction prediction;
  double distance = 0.0;  // Euclidean latent distance to the pivot
};

struct LandmarkSet {
  std::vector<Landmark> entries;
  bool shortage = false;
};

/// The k counterfactual corpus texts with the smallest latent distance to the
/// encoded query.
inline LandmarkSet init_landmarks(const Document& query, const Corpus& corpus,
                                  Generator& generator, BlackBox& blackbox,
                                  std::size_t k) {
  if (k < 1) throw ConfigError("init_landmarks: k must be >= 1");
  if (corpus.empty()) throw ConfigError("init_landmarks: empty corpus");

  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& doc : corpus.docs()) texts.push_back(doc.raw);
  const auto predictions = blackbox.predict_batch(texts);
  const auto anchor = blackbox.predict(query.raw);
  const auto pivot = generator.encode({query.raw})[0];
  const auto encodings = generator.encode(texts);

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (predictions[i].label != anchor.label) candidates.push_back(i);
  if (candidates.empty())
    throw NoCounterfactualsError(
        "the corpus contains no counterfactual to the query");

  std::vector<double> distances(corpus.size(), 0.0);
  for (std::size_t i : candidates)
    distances[i] = latent_distance(encodings[i], pivot);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) {
                     return distances[a] < distances[b];
                   });

  LandmarkSet set;
  set.shortage = candidates.size() < k;
  const std::size_t take = std::min(k, candidates.size());
  for (std::size_t r = 0; r < take; ++r) {
    const std::size_t i = candidates[r];
    set.entries.push_back(
        {encodings[i], texts[i], predictions[i], distances[i]});
  }
  return set;
}

/// A decoded text plus the latent point it came from.
struct LatentCandidate {
  std::string text;
  Prediction prediction;
  double distance = 0.0;  // origin-point distance to the pivot
};

struct ApproximateResult {
  std::vector<LatentCandidate> candidates;  // C_new
  std::vector<Landmark> landmarks;          // L_new
  bool degenerate = false;                  // |L| < 2 fallback used
};

struct XproaConfig {
  std::size_t interpolation_steps = 10;  // s
  std::size_t landmark_count = 20;       // k
  std::size_t per_class = 200;           // n closest per class
  std::size_t max_rounds = 10;
  std::uint64_t seed = 0;
  bool outward_interpolation = false;
};

/// One approximation sweep: `landmark_count` repeats of the two-stage
/// interpolation. The first stage explores between a random landmark pair;
/// the second interpolates every counterfactual interpolant toward the pivot.
/// Landmarks are replaced by the closest counterfactual found per repeat and
/// topped up from the previous set to keep their number constant.
inline ApproximateResult approximate(const LatentPoint& pivot,
                                     const Prediction& query_prediction,
                                     const std::vector<Landmark>& landmarks,
                                     Generator& generator, BlackBox& blackbox,
                                     const XproaConfig& config, Rng& rng) {
  if (landmarks.empty())
    throw ContractViolation("approximate: empty landmark set");

  ApproximateResult result;
  result.degenerate = landmarks.size() < 2;

  for (std::size_t repeat = 0; repeat < config.landmark_count; ++repeat) {
    std::vector<LatentPoint> first_stage;
    if (result.degenerate) {
      // Single landmark: pair it with itself plus the pivot midpoint.
      const auto& z = landmarks[0].point;
      first_stage.push_back(z);
      LatentPoint mid(z.size());
      for (std::size_t d = 0; d < z.size(); ++d)
        mid[d] = 0.5 * (z[d] + pivot[d]);
      first_stage.push_back(std::move(mid));
    } else {
      const std::size_t a = rng.below(landmarks.size());
      std::size_t b = rng.below(landmarks.size() - 1);
      if (b >= a) ++b;
      first_stage =
          interpolate(landmarks[a].point, landmarks[b].point,
                      config.interpolation_steps, config.outward_interpolation);
    }

    const auto first_texts = generator.decode(first_stage);
    const auto first_preds = blackbox.predict_batch(first_texts);

    std::vector<LatentPoint> second_stage;
    for (std::size_t i = 0; i < first_stage.size(); ++i) {
      if (first_preds[i].label == query_prediction.label) continue;
      auto segment =
          interpolate(first_stage[i], pivot, config.interpolation_steps,
                      config.outward_interpolation);
      for (auto& z : segment) second_stage.push_back(std::move(z));
    }
    if (second_stage.empty()) continue;  // landmark kept via final top-up

    const auto second_texts = generator.decode(second_stage);
    const auto second_preds = blackbox.predict_batch(second_texts);

    bool found = false;
    Landmark best;
    for (std::size_t i = 0; i < second_stage.size(); ++i) {
      const double d = latent_distance(second_stage[i], pivot);
      result.candidates.push_back({second_texts[i], second_preds[i], d});
      if (second_preds[i].label != query_prediction.label &&
          (!found || d < best.distance)) {
        best = {second_stage[i], second_texts[i], second_preds[i], d};
        found = true;
      }
    }
    if (found) result.landmarks.push_back(std::move(best));
  }

  // Dedup new landmarks by text, then top up from the previous set so the
  // landmark count stays constant across iterations.
  std::vector<Landmark> deduped;
  std::unordered_map<std::string, bool> seen;
  for (auto& lm : result.landmarks) {
    if (seen.count(lm.text)) continue;
    seen[lm.text] = true;
    deduped.push_back(std::move(lm));
  }
  auto by_distance = landmarks;
  std::stable_sort(by_distance.begin(), by_distance.end(),
                   [](const Landmark& a, const Landmark& b) {
                     return a.distance < b.distance;
                   });
  for (const auto& lm : by_distance) {
    if (deduped.size() >= landmarks.size()) break;
    if (seen.count(lm.text)) continue;
    seen[lm.text] = true;
    deduped.push_back(lm);
  }
  result.landmarks = std::move(deduped);
  return result;
}

/// Progressive neighborhood approximation (the latent engine). Terminates
/// when two successive rounds discover no counterfactual strictly closer to
/// the pivot than the incumbent best, or at the round cap; then returns the
/// n closest factuals plus n closest counterfactuals from the deduplicated
/// candidate pool.
inline Neighborhood construct_neighborhood_xproa(const Document& query,
                                                 const Corpus& corpus,
                                                 Generator& generator,
                                                 BlackBox& blackbox,
                                                 const XproaConfig& config) {
  if (query.tokens.empty())
    throw ConfigError("construct_neighborhood_xproa: query has no tokens");

  // Reconstruction gate: the engine must anchor on the query's own
  // neighborhood, not some other text's.
  const auto pivot = generator.encode({query.raw})[0];
  const auto reconstructed = generator.decode({pivot})[0];
  if (tokenize(reconstructed) != query.tokens)
    throw ReconstructionFailure(query.raw, reconstructed);

  Neighborhood out;
  out.query = query;
  out.query_prediction = blackbox.predict(query.raw);
  out.method = "xproa";

  auto landmark_set = init_landmarks(query, corpus, generator, blackbox,
                                     config.landmark_count);
  if (landmark_set.shortage) out.add_flag(flag::kLandmarkShortage);
  auto landmarks = std::move(landmark_set.entries);

  double incumbent = std::numeric_limits<double>::infinity();
  for (const auto& lm : landmarks) incumbent = std::min(incumbent, lm.distance);

  Rng rng(config.seed);
  std::vector<LatentCandidate> pool;  // deduplicated by canonical text
  std::unordered_map<std::string, std::size_t> pool_index;
  std::size_t stale_rounds = 0;

  while (out.rounds < config.max_rounds) {
    ++out.rounds;
    auto step = approximate(pivot, out.query_prediction, landmarks, generator,
                            blackbox, config, rng);
    if (step.degenerate) out.add_flag(flag::kDegenerateLandmarks);

    double round_best = std::numeric_limits<double>::infinity();
    for (auto& c : step.candidates) {
      if (c.prediction.label != out.query_prediction.label)
        round_best = std::min(round_best, c.distance);
      const std::string key = Document::from_raw(c.text).canonical();
      auto it = pool_index.find(key);
      if (it == pool_index.end()) {
        pool_index.emplace(key, pool.size());
        pool.push_back(std::move(c));
      } else if (c.distance < pool[it->second].distance) {
        pool[it->second].distance = c.distance;
      }
    }
    landmarks = std::move(step.landmarks);

    if (round_best < incumbent) {
      incumbent = round_best;
      stale_rounds = 0;
    } else if (++stale_rounds >= 2) {
      break;
    }
  }

  // Final selection: the n closest per class, excluding the query itself.
  const std::string query_key = query.canonical();
  std::vector<std::size_t> factuals, counterfactuals;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (Document::from_raw(pool[i].text).canonical() == query_key) continue;
    if (pool[i].prediction.label == out.query_prediction.label)
      factuals.push_back(i);
    else
      counterfactuals.push_back(i);
  }
  auto sort_take = [&](std::vector<std::size_t>& indices) {
    std::stable_sort(indices.begin(), indices.end(),
                     [&](std::size_t a, std::size_t b) {
                       return pool[a].distance < pool[b].distance;
                     });
    if (indices.size() > config.per_class) indices.resize(config.per_class);
  };
  sort_take(factuals);
  sort_take(counterfactuals);
  if (factuals.size() < config.per_class ||
      counterfactuals.size() < config.per_class)
    out.add_flag(flag::kClassShortage);

  for (const auto* group : {&factuals, &counterfactuals})
    for (std::size_t i : *group)
      out.members.push_back({Document::from_raw(pool[i].text),
                             pool[i].prediction, pool[i].distance});
  out.tally_classes();
  if (!out.members.empty() &&
      (out.class_counts[0] == 0 || out.class_counts[1] == 0))
    out.add_flag(flag::kSingleClassNeighborhood);
  return out;
}

}  // namespace xproab
