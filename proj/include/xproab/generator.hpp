#pragma once

#include <cmath>
#include <cstddef>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xproab/errors.hpp"
#include "xproab/text.hpp"

namespace xproab {

using LatentPoint = std::vector<double>;

inline double latent_distance(const LatentPoint& a, const LatentPoint& b) {
  if (a.size() != b.size())
    throw ContractViolation("latent_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// The encode/decode abstraction the latent engine needs. Encoding must be
/// deterministic; both directions work on batches.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::size_t dimension() = 0;
  virtual std::vector<LatentPoint> encode(
      const std::vector<std::string>& texts) = 0;
  virtual std::vector<std::string> decode(
      const std::vector<LatentPoint>& points) = 0;
};

/// Deterministic generator for tests and offline runs. Encodes texts as
/// L2-normalized tf-idf vectors and decodes a point to the nearest text among
/// the corpus plus everything previously encoded through this handle, so
/// decode(encode(x)) reproduces x exactly and latent proximity tracks tf-idf
/// similarity.
class ReferenceGenerator : public Generator {
 public:
  explicit ReferenceGenerator(const Corpus& corpus)
      : model_(TfIdfModel::fit(corpus)) {
    for (const auto& doc : corpus.docs()) remember(doc.raw);
  }

  std::size_t dimension() override { return model_.dimension(); }

  std::vector<LatentPoint> encode(
      const std::vector<std::string>& texts) override {
    std::vector<LatentPoint> out;
    out.reserve(texts.size());
    std::lock_guard lock(mutex_);
    for (const auto& text : texts)
      out.push_back(catalog_[remember(text)].second.to_dense());
    return out;
  }

  std::vector<std::string> decode(
      const std::vector<LatentPoint>& points) override {
    std::vector<std::string> out;
    out.reserve(points.size());
    std::lock_guard lock(mutex_);
    for (const auto& point : points) {
      if (point.size() != model_.dimension())
        throw ContractViolation("decode: dimension mismatch");
      out.push_back(catalog_[nearest(point)].first);
    }
    return out;
  }

 private:
  // Insert-if-absent into the catalog; returns the entry index.
  std::size_t remember(const std::string& text) {
    auto it = index_.find(text);
    if (it != index_.end()) return it->second;
    const std::size_t pos = catalog_.size();
    catalog_.emplace_back(text, model_.vectorize(Document::from_raw(text)));
    index_.emplace(text, pos);
    return pos;
  }

  // Nearest catalog entry by Euclidean distance; ties keep the earliest.
  std::size_t nearest(const LatentPoint& point) const {
    double point_sq = 0.0;
    for (double v : point) point_sq += v * v;
    std::size_t best = 0;
    double best_sq = 0.0;
    for (std::size_t c = 0; c < catalog_.size(); ++c) {
      const auto& vec = catalog_[c].second;
      double dot = 0.0;
      for (const auto& [i, v] : vec.entries()) dot += v * point[i];
      const double sq = point_sq - 2.0 * dot + vec.squared_norm();
      if (c == 0 || sq < best_sq) {
        best = c;
        best_sq = sq;
      }
    }
    return best;
  }

  TfIdfModel model_;
  std::vector<std::pair<std::string, SparseVector>> catalog_;
  std::unordered_map<std::string, std::size_t> index_;
  mutable std::mutex mutex_;
};

}  // namespace xproab
