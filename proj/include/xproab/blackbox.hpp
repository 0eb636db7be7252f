#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xproab/errors.hpp"
#include "xproab/text.hpp"

namespace xproab {

/// Binary classification outcome. Ties at score 0.5 go to the positive class.
struct Prediction {
  int label = 0;                // 1 iff score_positive >= 0.5
  double score_positive = 0.0;  // P(y = 1)

  double confidence() const {
    return label == 1 ? score_positive : 1.0 - score_positive;
  }

  static Prediction from_score(double score_positive) {
    Prediction p;
    p.score_positive = score_positive;
    p.label = score_positive >= 0.5 ? 1 : 0;
    return p;
  }

  bool operator==(const Prediction& other) const {
    return label == other.label && score_positive == other.score_positive;
  }
};

/// Interface every classifier backend implements: texts in, positive-class
/// scores out, in input order. Implementations must be deterministic.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::vector<double> score_batch(
      const std::vector<std::string>& texts) = 0;
  virtual std::string kind() const = 0;
};

/// A labeled binary dataset.
struct LabeledDataset {
  std::vector<Document> docs;
  std::vector<int> labels;

  std::size_t size() const { return docs.size(); }
};

/// Multinomial naive Bayes with add-one smoothing over bag-of-words counts.
/// Out-of-vocabulary tokens are dropped, so a fully unseen text scores at the
/// class prior.
class NaiveBayesClassifier : public Classifier {
 public:
  static std::unique_ptr<NaiveBayesClassifier> train(
      const LabeledDataset& data) {
    require_both_classes(data);
    auto model = std::make_unique<NaiveBayesClassifier>();
    std::map<std::string, std::array<std::uint64_t, 2>> counts;
    std::array<std::uint64_t, 2> doc_counts{0, 0};
    std::array<std::uint64_t, 2> token_totals{0, 0};
    for (std::size_t i = 0; i < data.size(); ++i) {
      const int y = data.labels[i];
      ++doc_counts[y];
      for (const auto& t : data.docs[i].tokens) {
        auto [it, inserted] = counts.try_emplace(t);
        if (inserted) it->second = {0, 0};
        ++it->second[y];
        ++token_totals[y];
      }
    }
    const double v = static_cast<double>(counts.size());
    const double total = static_cast<double>(data.size());
    for (int y : {0, 1})
      model->log_prior_[y] = std::log(doc_counts[y] / total);
    std::size_t index = 0;
    for (const auto& [token, c] : counts) {
      model->vocab_.emplace(token, index++);
      for (int y : {0, 1})
        model->log_likelihood_[y].push_back(
            std::log((c[y] + 1.0) / (token_totals[y] + v)));
    }
    return model;
  }

  std::vector<double> score_batch(
      const std::vector<std::string>& texts) override {
    std::vector<double> scores;
    scores.reserve(texts.size());
    for (const auto& text : texts) scores.push_back(score_one(text));
    return scores;
  }

  std::string kind() const override { return "nb"; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = kind();
    j["log_prior"] = log_prior_;
    nlohmann::ordered_json vocab = nlohmann::ordered_json::object();
    for (const auto& [token, index] : vocab_) vocab[token] = index;
    j["vocabulary"] = vocab;
    j["log_likelihood_negative"] = log_likelihood_[0];
    j["log_likelihood_positive"] = log_likelihood_[1];
    return j;
  }

  static std::unique_ptr<NaiveBayesClassifier> from_json(
      const nlohmann::json& j) {
    auto model = std::make_unique<NaiveBayesClassifier>();
    model->log_prior_ = j.at("log_prior").get<std::array<double, 2>>();
    for (const auto& [token, index] : j.at("vocabulary").items())
      model->vocab_.emplace(token, index.get<std::size_t>());
    model->log_likelihood_[0] =
        j.at("log_likelihood_negative").get<std::vector<double>>();
    model->log_likelihood_[1] =
        j.at("log_likelihood_positive").get<std::vector<double>>();
    return model;
  }

 private:
  static void require_both_classes(const LabeledDataset& data) {
    bool has[2] = {false, false};
    for (int y : data.labels) {
      if (y != 0 && y != 1) throw ConfigError("labels must be 0 or 1");
      has[y] = true;
    }
    if (!has[0] || !has[1])
      throw ConfigError("training set must contain both classes");
  }

  double score_one(const std::string& text) const {
    double lp0 = log_prior_[0];
    double lp1 = log_prior_[1];
    for (const auto& t : tokenize(text)) {
      auto it = vocab_.find(t);
      if (it == vocab_.end()) continue;
      lp0 += log_likelihood_[0][it->second];
      lp1 += log_likelihood_[1][it->second];
    }
    const double m = std::max(lp0, lp1);
    const double e0 = std::exp(lp0 - m);
    const double e1 = std::exp(lp1 - m);
    return e1 / (e0 + e1);
  }

  std::map<std::string, std::size_t> vocab_;
  std::array<double, 2> log_prior_{0.0, 0.0};
  std::array<std::vector<double>, 2> log_likelihood_;
};

/// Logistic-loss linear model over tf-idf features, trained by full-batch
/// gradient descent (tolerance 1e-6 on the gradient, at most 500 epochs).
class LogisticClassifier : public Classifier {
 public:
  static std::unique_ptr<LogisticClassifier> train(const LabeledDataset& data) {
    bool has[2] = {false, false};
    for (int y : data.labels) {
      if (y != 0 && y != 1) throw ConfigError("labels must be 0 or 1");
      has[y] = true;
    }
    if (!has[0] || !has[1])
      throw ConfigError("training set must contain both classes");

    auto model = std::make_unique<LogisticClassifier>();
    model->tfidf_ = TfIdfModel::fit(Corpus(data.docs, CorpusRole::train));
    const std::size_t dim = model->tfidf_.dimension();
    model->weights_.assign(dim, 0.0);
    model->bias_ = 0.0;

    std::vector<SparseVector> features;
    features.reserve(data.size());
    for (const auto& doc : data.docs)
      features.push_back(model->tfidf_.vectorize(doc));

    const double n = static_cast<double>(data.size());
    // Features are L2-normalized, so the loss gradient is 1/4-Lipschitz and a
    // fixed step of 2 is stable.
    const double step = 2.0;
    std::vector<double> grad(dim + 1);
    for (int epoch = 0; epoch < 500; ++epoch) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = 0; i < features.size(); ++i) {
        double z = model->bias_;
        for (const auto& [d, v] : features[i].entries())
          z += model->weights_[d] * v;
        const double err = sigmoid(z) - data.labels[i];
        for (const auto& [d, v] : features[i].entries()) grad[d] += err * v;
        grad[dim] += err;
      }
      double max_abs = 0.0;
      for (double& g : grad) {
        g /= n;
        max_abs = std::max(max_abs, std::abs(g));
      }
      if (max_abs < 1e-6) break;
      for (std::size_t d = 0; d < dim; ++d)
        model->weights_[d] -= step * grad[d];
      model->bias_ -= step * grad[dim];
    }
    return model;
  }

  std::vector<double> score_batch(
      const std::vector<std::string>& texts) override {
    std::vector<double> scores;
    scores.reserve(texts.size());
    for (const auto& text : texts) {
      const auto v = tfidf_.vectorize(Document::from_raw(text));
      double z = bias_;
      for (const auto& [d, w] : v.entries()) z += weights_[d] * w;
      scores.push_back(sigmoid(z));
    }
    return scores;
  }

  std::string kind() const override { return "linear"; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = kind();
    nlohmann::ordered_json vocab = nlohmann::ordered_json::object();
    for (const auto& [token, index] : tfidf_.vocabulary()) vocab[token] = index;
    j["vocabulary"] = vocab;
    std::vector<double> idf(tfidf_.dimension());
    for (std::size_t i = 0; i < idf.size(); ++i) idf[i] = tfidf_.idf(i);
    j["idf"] = idf;
    j["weights"] = weights_;
    j["bias"] = bias_;
    return j;
  }

  static std::unique_ptr<LogisticClassifier> from_json(
      const nlohmann::json& j) {
    auto model = std::make_unique<LogisticClassifier>();
    std::map<std::string, std::size_t> vocab;
    for (const auto& [token, index] : j.at("vocabulary").items())
      vocab.emplace(token, index.get<std::size_t>());
    model->tfidf_ = TfIdfModel::from_parts(
        std::move(vocab), j.at("idf").get<std::vector<double>>());
    model->weights_ = j.at("weights").get<std::vector<double>>();
    model->bias_ = j.at("bias").get<double>();
    if (model->weights_.size() != model->tfidf_.dimension())
      throw ConfigError("model file: weight/vocabulary size mismatch");
    return model;
  }

 private:
  static double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

  TfIdfModel tfidf_;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

/// The to-be-explained classifier handle: memoizes predictions keyed by the
/// exact raw text (black-box calls dominate runtime), thread-safe with
/// insert-if-absent semantics.
class BlackBox {
 public:
  explicit BlackBox(std::unique_ptr<Classifier> model)
      : model_(std::move(model)) {}

  Prediction predict(const std::string& text) {
    return predict_batch({text})[0];
  }

  std::vector<Prediction> predict_batch(const std::vector<std::string>& texts) {
    std::vector<Prediction> out(texts.size());
    std::vector<std::size_t> missing;
    {
      std::shared_lock lock(mutex_);
      for (std::size_t i = 0; i < texts.size(); ++i) {
        auto it = cache_.find(texts[i]);
        if (it != cache_.end())
          out[i] = it->second;
        else
          missing.push_back(i);
      }
    }
    if (!missing.empty()) {
      std::vector<std::string> batch;
      std::vector<std::size_t> batch_of;  // position in `batch` per miss
      std::unordered_map<std::string, std::size_t> dedup;
      for (std::size_t i : missing) {
        auto [it, inserted] = dedup.try_emplace(texts[i], batch.size());
        if (inserted) batch.push_back(texts[i]);
        batch_of.push_back(it->second);
      }
      const auto scores = model_->score_batch(batch);
      if (scores.size() != batch.size())
        throw ProtocolError("classifier returned a mismatched batch size");
      model_calls_ += batch.size();
      std::unique_lock lock(mutex_);
      for (std::size_t k = 0; k < missing.size(); ++k) {
        const auto& text = texts[missing[k]];
        auto [it, inserted] =
            cache_.try_emplace(text, Prediction::from_score(scores[batch_of[k]]));
        out[missing[k]] = it->second;
      }
    }
    return out;
  }

  /// Number of texts actually sent to the underlying model (cache misses).
  std::uint64_t model_calls() const { return model_calls_.load(); }

  const Classifier& model() const { return *model_; }
  std::string kind() const { return model_->kind(); }

 private:
  std::unique_ptr<Classifier> model_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, Prediction> cache_;
  std::atomic<std::uint64_t> model_calls_{0};
};

inline bool is_counterfactual(BlackBox& blackbox, const std::string& candidate,
                              const Prediction& anchor) {
  return blackbox.predict(candidate).label != anchor.label;
}

/// Trains a builtin classifier; `kind` is "nb" or "linear".
inline std::unique_ptr<Classifier> train_builtin(const LabeledDataset& data,
                                                 const std::string& kind) {
  if (kind == "nb") return NaiveBayesClassifier::train(data);
  if (kind == "linear") return LogisticClassifier::train(data);
  throw ConfigError("unknown builtin classifier kind: " + kind);
}

/// Serializes a builtin model to a single self-describing JSON document.
inline nlohmann::ordered_json model_to_json(const Classifier& model) {
  if (auto* nb = dynamic_cast<const NaiveBayesClassifier*>(&model))
    return nb->to_json();
  if (auto* lin = dynamic_cast<const LogisticClassifier*>(&model))
    return lin->to_json();
  throw ConfigError("model kind '" + model.kind() + "' cannot be serialized");
}

inline std::unique_ptr<Classifier> model_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "nb") return NaiveBayesClassifier::from_json(j);
  if (kind == "linear") return LogisticClassifier::from_json(j);
  throw ConfigError("unknown model kind in file: " + kind);
}

}  // namespace xproab
