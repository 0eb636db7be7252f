#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "xproab/blackbox.hpp"
#include "xproab/text.hpp"

namespace xproab {

namespace flag {
inline constexpr const char* kPrototypeShortage = "prototype_shortage";
inline constexpr const char* kLandmarkShortage = "landmark_shortage";
inline constexpr const char* kTruncated = "truncated";
inline constexpr const char* kPoolRefilled = "pool_refilled";
inline constexpr const char* kDegenerateLandmarks = "degenerate_landmarks";
inline constexpr const char* kClassShortage = "class_shortage";
inline constexpr const char* kSingleClassNeighborhood =
    "single_class_neighborhood";
inline constexpr const char* kConstantScores = "constant_scores";
inline constexpr const char* kFactualShortage = "factual_shortage";
inline constexpr const char* kCounterfactualShortage = "counterfactual_shortage";
inline constexpr const char* kEmptyPlan = "empty_plan";
inline constexpr const char* kMaskDropped = "mask_dropped";
inline constexpr const char* kMaskNoop = "mask_noop";
}  // namespace flag

struct NeighborhoodMember {
  Document doc;
  Prediction prediction;
  /// xprob: tf-idf cosine distance to the query; xproa: latent distance of
  /// the point the text was decoded from to the pivot (minimum over origins).
  double distance = 0.0;
};

/// The labeled synthetic dataset around a query.
struct Neighborhood {
  Document query;
  Prediction query_prediction;
  std::vector<NeighborhoodMember> members;
  std::string method;  // "xprob" | "xproa"
  std::array<std::size_t, 2> class_counts{0, 0};
  std::vector<std::string> flags;
  std::size_t rounds = 0;

  bool has_flag(const std::string& name) const {
    for (const auto& f : flags)
      if (f == name) return true;
    return false;
  }

  void add_flag(const std::string& name) {
    if (!has_flag(name)) flags.push_back(name);
  }

  void tally_classes() {
    class_counts = {0, 0};
    for (const auto& m : members) ++class_counts[m.prediction.label];
  }
};

}  // namespace xproab
