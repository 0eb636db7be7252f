#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xproab/errors.hpp"

namespace xproab {

/// Reserved padding token. The tokenizer detaches punctuation, so no document
/// can ever contain it as a token.
inline constexpr const char* kPadToken = "<pad>";

namespace detail {

inline bool is_space(char c) {
  const unsigned char u = static_cast<unsigned char>(c);
  return u == ' ' || u == '\t' || u == '\n' || u == '\r' || u == '\f' ||
         u == '\v';
}

inline bool is_punct(char c) {
  const unsigned char u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

inline char lower(char c) {
  const unsigned char u = static_cast<unsigned char>(c);
  return u < 0x80 ? static_cast<char>(std::tolower(u)) : c;
}

}  // namespace detail

/// Lowercases, splits on whitespace, and detaches leading/trailing ASCII
/// punctuation as standalone tokens. Bytes >= 0x80 pass through untouched, so
/// multi-byte UTF-8 sequences stay inside their word.
inline std::vector<std::string> tokenize(std::string_view raw) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && detail::is_space(raw[i])) ++i;
    const std::size_t start = i;
    while (i < raw.size() && !detail::is_space(raw[i])) ++i;
    if (start == i) break;

    std::string chunk;
    chunk.reserve(i - start);
    for (std::size_t k = start; k < i; ++k)
      chunk.push_back(detail::lower(raw[k]));

    std::size_t lo = 0;
    while (lo < chunk.size() && detail::is_punct(chunk[lo]))
      tokens.emplace_back(1, chunk[lo++]);
    std::size_t hi = chunk.size();
    while (hi > lo && detail::is_punct(chunk[hi - 1])) --hi;
    if (lo < hi) tokens.emplace_back(chunk.substr(lo, hi - lo));
    for (std::size_t k = hi; k < chunk.size(); ++k)
      tokens.emplace_back(1, chunk[k]);
  }
  return tokens;
}

/// Single-space join; the display form of synthetic token sequences.
inline std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

/// A text unit. `tokens` is always exactly tokenize(raw).
struct Document {
  std::string raw;
  std::vector<std::string> tokens;

  static Document from_raw(std::string_view raw) {
    Document d;
    d.raw.assign(raw);
    d.tokens = tokenize(raw);
    return d;
  }

  /// Builds a document from a token sequence; re-tokenizes the joined form so
  /// the raw/tokens invariant holds even for hand-assembled sequences.
  static Document from_tokens(const std::vector<std::string>& tokens) {
    return from_raw(detokenize(tokens));
  }

  /// Canonical text form used for duplicate detection.
  std::string canonical() const { return detokenize(tokens); }
};

enum class CorpusRole { generator_training, prototypes, train, valid, test };

/// Immutable ordered collection of documents.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> docs,
                  CorpusRole role = CorpusRole::prototypes)
      : docs_(std::move(docs)), role_(role) {}

  static Corpus from_lines(const std::vector<std::string>& lines,
                           CorpusRole role = CorpusRole::prototypes) {
    std::vector<Document> docs;
    docs.reserve(lines.size());
    for (const auto& line : lines) docs.push_back(Document::from_raw(line));
    return Corpus(std::move(docs), role);
  }

  const std::vector<Document>& docs() const { return docs_; }
  const Document& operator[](std::size_t i) const { return docs_[i]; }
  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  CorpusRole role() const { return role_; }

 private:
  std::vector<Document> docs_;
  CorpusRole role_ = CorpusRole::prototypes;
};

/// Sparse vector over a fixed vocabulary; no explicit zeros are stored.
/// Entries are kept sorted by index, so iteration order is deterministic.
class SparseVector {
 public:
  SparseVector() = default;
  explicit SparseVector(std::size_t dimension) : dimension_(dimension) {}

  void set(std::size_t index, double value) {
    if (index >= dimension_)
      throw ContractViolation("sparse vector index out of range");
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), index,
        [](const auto& e, std::size_t i) { return e.first < i; });
    if (it != entries_.end() && it->first == index) {
      if (value == 0.0)
        entries_.erase(it);
      else
        it->second = value;
    } else if (value != 0.0) {
      entries_.insert(it, {index, value});
    }
  }

  double at(std::size_t index) const {
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), index,
        [](const auto& e, std::size_t i) { return e.first < i; });
    return (it != entries_.end() && it->first == index) ? it->second : 0.0;
  }

  std::size_t dimension() const { return dimension_; }
  const std::vector<std::pair<std::size_t, double>>& entries() const {
    return entries_;
  }
  bool is_zero() const { return entries_.empty(); }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& [i, v] : entries_) s += v * v;
    return s;
  }
  double norm() const { return std::sqrt(squared_norm()); }

  void scale(double factor) {
    for (auto& [i, v] : entries_) v *= factor;
  }

  /// Divides by the L2 norm; the zero vector is left untouched.
  void l2_normalize() {
    const double n = norm();
    if (n > 0.0) scale(1.0 / n);
  }

  static double dot(const SparseVector& a, const SparseVector& b) {
    double s = 0.0;
    auto ia = a.entries_.begin();
    auto ib = b.entries_.begin();
    while (ia != a.entries_.end() && ib != b.entries_.end()) {
      if (ia->first < ib->first)
        ++ia;
      else if (ib->first < ia->first)
        ++ib;
      else {
        s += ia->second * ib->second;
        ++ia;
        ++ib;
      }
    }
    return s;
  }

  std::vector<double> to_dense() const {
    std::vector<double> out(dimension_, 0.0);
    for (const auto& [i, v] : entries_) out[i] = v;
    return out;
  }

 private:
  std::size_t dimension_ = 0;
  std::vector<std::pair<std::size_t, double>> entries_;
};

/// Cosine distance in [0, 2]. Either vector being zero yields 1, the
/// "unrelated" value for nonnegative vectors.
inline double cosine_distance(const SparseVector& a, const SparseVector& b) {
  if (a.dimension() != b.dimension())
    throw ContractViolation("cosine_distance: dimension mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 1.0;
  if (a.entries() == b.entries()) return 0.0;
  const double d = 1.0 - SparseVector::dot(a, b) / (na * nb);
  return std::clamp(d, 0.0, 2.0);
}

/// tf-idf vectorizer with smoothed idf ln((1+N)/(1+df)) + 1 and L2-normalized
/// outputs. Vocabulary indices follow lexicographic token order, so refitting
/// on the same corpus reproduces the model exactly.
class TfIdfModel {
 public:
  static TfIdfModel fit(const Corpus& corpus) {
    if (corpus.empty()) throw ConfigError("fit_tfidf: empty corpus");
    TfIdfModel model;
    std::map<std::string, std::size_t> df;
    for (const auto& doc : corpus.docs()) {
      std::map<std::string, bool> seen;
      for (const auto& t : doc.tokens) {
        if (!seen.count(t)) {
          seen[t] = true;
          ++df[t];
        }
      }
    }
    const double n = static_cast<double>(corpus.size());
    std::size_t index = 0;
    model.idf_.reserve(df.size());
    for (const auto& [token, count] : df) {
      model.vocab_.emplace(token, index++);
      model.idf_.push_back(std::log((1.0 + n) / (1.0 + count)) + 1.0);
    }
    return model;
  }

  /// Out-of-vocabulary tokens contribute nothing; an all-OOV document maps to
  /// the zero vector.
  SparseVector vectorize(const Document& doc) const {
    SparseVector v(dimension());
    std::map<std::size_t, double> tf;
    for (const auto& t : doc.tokens) {
      auto it = vocab_.find(t);
      if (it != vocab_.end()) tf[it->second] += 1.0;
    }
    for (const auto& [i, count] : tf) v.set(i, count * idf_[i]);
    v.l2_normalize();
    return v;
  }

  static TfIdfModel from_parts(std::map<std::string, std::size_t> vocabulary,
                               std::vector<double> idf) {
    if (vocabulary.size() != idf.size())
      throw ConfigError("tf-idf model: vocabulary/idf size mismatch");
    TfIdfModel model;
    model.vocab_ = std::move(vocabulary);
    model.idf_ = std::move(idf);
    return model;
  }

  std::size_t dimension() const { return idf_.size(); }
  const std::map<std::string, std::size_t>& vocabulary() const {
    return vocab_;
  }
  double idf(std::size_t index) const { return idf_[index]; }
  bool contains(const std::string& token) const {
    return vocab_.count(token) > 0;
  }

 private:
  std::map<std::string, std::size_t> vocab_;
  std::vector<double> idf_;
};

inline std::vector<SparseVector> vectorize_corpus(const TfIdfModel& model,
                                                  const Corpus& corpus) {
  std::vector<SparseVector> out;
  out.reserve(corpus.size());
  for (const auto& doc : corpus.docs()) out.push_back(model.vectorize(doc));
  return out;
}

}  // namespace xproab
