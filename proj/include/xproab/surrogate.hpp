#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "xproab/errors.hpp"
#include "xproab/neighborhood.hpp"
#include "xproab/text.hpp"

namespace xproab {

/// The bag-of-words feature space spanned by a neighborhood and its query:
/// local vocabulary, tf-idf distances to the query and binary presence
/// vectors, shared by the surrogate fit and the exemplar selection.
struct LocalSpace {
  std::map<std::string, std::size_t> vocabulary;  // token -> column
  TfIdfModel tfidf;                    // fitted on members + query
  std::vector<double> query_distance;  // tf-idf cosine distance per member
  std::vector<SparseVector> member_bags;
  SparseVector query_bag;

  static LocalSpace build(const Neighborhood& neighborhood) {
    LocalSpace space;
    std::vector<Document> docs;
    docs.reserve(neighborhood.members.size() + 1);
    for (const auto& m : neighborhood.members) docs.push_back(m.doc);
    docs.push_back(neighborhood.query);
    space.tfidf = TfIdfModel::fit(Corpus(docs));
    space.vocabulary = space.tfidf.vocabulary();

    const auto query_vec = space.tfidf.vectorize(neighborhood.query);
    space.query_distance.reserve(neighborhood.members.size());
    for (const auto& m : neighborhood.members)
      space.query_distance.push_back(
          cosine_distance(query_vec, space.tfidf.vectorize(m.doc)));

    space.member_bags.reserve(neighborhood.members.size());
    for (const auto& m : neighborhood.members)
      space.member_bags.push_back(bag(m.doc, space.vocabulary));
    space.query_bag = bag(neighborhood.query, space.vocabulary);
    return space;
  }

  /// Binary presence vector over the local vocabulary.
  static SparseVector bag(const Document& doc,
                          const std::map<std::string, std::size_t>& vocab) {
    SparseVector v(vocab.size());
    std::unordered_set<std::string> seen;
    for (const auto& t : doc.tokens) {
      if (!seen.insert(t).second) continue;
      auto it = vocab.find(t);
      if (it != vocab.end()) v.set(it->second, 1.0);
    }
    return v;
  }
};

/// Distance kernel weights exp(-d^2 / sigma^2); distances are tf-idf cosine
/// distances over the local bag-of-words vocabulary.
inline std::vector<double> neighborhood_weights(const Neighborhood& neighborhood,
                                                double sigma) {
  if (sigma <= 0.0)
    throw ConfigError("neighborhood_weights: sigma must be positive");
  const auto space = LocalSpace::build(neighborhood);
  std::vector<double> weights;
  weights.reserve(space.query_distance.size());
  for (double d : space.query_distance)
    weights.push_back(std::exp(-(d * d) / (sigma * sigma)));
  return weights;
}

/// Weighted-least-squares linear model over binary local-vocabulary features.
struct LinearSurrogate {
  std::vector<std::string> tokens;   // column -> token
  std::vector<double> coefficients;  // per column
  double intercept = 0.0;
  double sigma = 1.0;
  double r2 = 0.0;        // unweighted soft-score R^2 on the neighborhood
  double fidelity = 0.0;  // label agreement with the black box on it
  std::vector<std::string> flags;

  double coefficient_of(const std::string& token) const {
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (tokens[i] == token) return coefficients[i];
    return 0.0;
  }

  double predict_score(const Document& doc) const {
    std::unordered_set<std::string> present(doc.tokens.begin(),
                                            doc.tokens.end());
    double score = intercept;
    for (std::size_t i = 0; i < tokens.size(); ++i)
      if (present.count(tokens[i])) score += coefficients[i];
    return score;
  }

  int predict_label(const Document& doc) const {
    return predict_score(doc) >= 0.5 ? 1 : 0;
  }
};

/// Solves the weighted ridge normal equations over binary presence features
/// plus an unpenalized intercept column (the last coefficient). Exposed so
/// weight-scale properties can be checked with explicit weights.
inline std::vector<double> solve_weighted_ridge(
    const std::vector<SparseVector>& bags, std::size_t feature_count,
    const std::vector<double>& targets, const std::vector<double>& weights,
    double ridge) {
  const std::size_t cols = feature_count + 1;
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(cols, cols);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(cols);
  for (std::size_t r = 0; r < bags.size(); ++r) {
    const double w = weights[r];
    const double y = targets[r];
    std::vector<std::size_t> active;  // feature columns, intercept last
    active.reserve(bags[r].entries().size() + 1);
    for (const auto& [i, v] : bags[r].entries()) active.push_back(i);
    active.push_back(cols - 1);
    for (std::size_t a : active) {
      for (std::size_t b : active) normal(a, b) += w;
      rhs(a) += w * y;
    }
  }
  for (std::size_t i = 0; i + 1 < cols; ++i) normal(i, i) += ridge;

  Eigen::VectorXd beta = normal.ldlt().solve(rhs);
  // One step of iterative refinement keeps the normal-equation residual
  // within tolerance on badly scaled systems.
  const Eigen::VectorXd residual = rhs - normal * beta;
  if (residual.lpNorm<Eigen::Infinity>() >
      1e-8 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>()))
    beta += normal.ldlt().solve(residual);

  return std::vector<double>(beta.data(), beta.data() + cols);
}

/// Minimizes sum_i w_i (b(x_i) - m(x_i))^2 + ridge * ||coef||^2 over binary
/// bag-of-words features (intercept unpenalized), targets being the
/// black-box positive-class scores stored in the neighborhood.
inline LinearSurrogate fit_surrogate(const Neighborhood& neighborhood,
                                     double sigma, double ridge = 1e-6) {
  if (neighborhood.members.size() < 2)
    throw DegenerateNeighborhood(
        "fit_surrogate: need at least two neighborhood members");
  if (sigma <= 0.0) throw ConfigError("fit_surrogate: sigma must be positive");

  const auto space = LocalSpace::build(neighborhood);
  const std::size_t rows = neighborhood.members.size();

  std::vector<double> weights;
  weights.reserve(rows);
  for (double d : space.query_distance)
    weights.push_back(std::exp(-(d * d) / (sigma * sigma)));
  std::vector<double> targets;
  targets.reserve(rows);
  for (const auto& m : neighborhood.members)
    targets.push_back(m.prediction.score_positive);

  const auto beta = solve_weighted_ridge(
      space.member_bags, space.vocabulary.size(), targets, weights, ridge);

  LinearSurrogate surrogate;
  surrogate.sigma = sigma;
  surrogate.tokens.reserve(space.vocabulary.size());
  surrogate.coefficients.reserve(space.vocabulary.size());
  for (const auto& [token, column] : space.vocabulary) {
    surrogate.tokens.push_back(token);
    surrogate.coefficients.push_back(beta[column]);
  }
  surrogate.intercept = beta.back();

  // Diagnostics on the neighborhood itself.
  double mean = 0.0;
  bool constant_targets = true;
  for (const auto& m : neighborhood.members) {
    mean += m.prediction.score_positive;
    constant_targets = constant_targets &&
                       m.prediction.score_positive == targets.front();
  }
  mean /= static_cast<double>(rows);
  double ss_res = 0.0, ss_tot = 0.0;
  std::size_t agree = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = neighborhood.members[r].prediction.score_positive;
    double predicted = surrogate.intercept;
    for (const auto& [i, v] : space.member_bags[r].entries())
      predicted += beta[i];
    ss_res += (y - predicted) * (y - predicted);
    ss_tot += (y - mean) * (y - mean);
    const int label = predicted >= 0.5 ? 1 : 0;
    if (label == neighborhood.members[r].prediction.label) ++agree;
  }
  if (constant_targets || ss_tot == 0.0) {
    surrogate.r2 = 1.0;
    surrogate.flags.push_back(flag::kConstantScores);
  } else {
    surrogate.r2 = 1.0 - ss_res / ss_tot;
  }
  surrogate.fidelity = static_cast<double>(agree) / static_cast<double>(rows);
  if (neighborhood.class_counts[0] == 0 || neighborhood.class_counts[1] == 0)
    surrogate.flags.push_back(flag::kSingleClassNeighborhood);
  return surrogate;
}

}  // namespace xproab
