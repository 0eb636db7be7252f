#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "xproab/blackbox.hpp"
#include "xproab/errors.hpp"
#include "xproab/generator.hpp"
#include "xproab/neighborhood.hpp"
#include "xproab/ngram.hpp"
#include "xproab/surrogate.hpp"
#include "xproab/text.hpp"
#include "xproab/version.hpp"
#include "xproab/xproa.hpp"
#include "xproab/xprob.hpp"

namespace xproab {

struct Attribution {
  std::string token;
  double weight = 0.0;

  bool operator==(const Attribution&) const = default;
};

struct Exemplar {
  Document doc;
  Prediction prediction;
  double distance = 0.0;  // local tf-idf cosine distance to the query
};

/// Intrinsic attributions cover every query token (query order); extrinsic
/// ones are the top-m novel tokens by |coefficient|.
inline std::pair<std::vector<Attribution>, std::vector<Attribution>>
split_attributions(const LinearSurrogate& surrogate, const Document& query,
                   std::size_t extrinsic_top = 3) {
  std::unordered_set<std::string> query_tokens(query.tokens.begin(),
                                               query.tokens.end());
  std::vector<Attribution> intrinsic;
  std::unordered_set<std::string> emitted;
  for (const auto& t : query.tokens) {
    if (!emitted.insert(t).second) continue;
    intrinsic.push_back({t, surrogate.coefficient_of(t)});
  }

  std::vector<Attribution> extrinsic;
  for (std::size_t i = 0; i < surrogate.tokens.size(); ++i)
    if (!query_tokens.count(surrogate.tokens[i]))
      extrinsic.push_back({surrogate.tokens[i], surrogate.coefficients[i]});
  std::stable_sort(extrinsic.begin(), extrinsic.end(),
                   [](const Attribution& a, const Attribution& b) {
                     return std::abs(a.weight) > std::abs(b.weight);
                   });
  if (extrinsic.size() > extrinsic_top) extrinsic.resize(extrinsic_top);
  return {std::move(intrinsic), std::move(extrinsic)};
}

enum class ExemplarClass { factual, counterfactual };

/// Greedy diversity-aware selection: each step re-scores every remaining
/// candidate by lambda * (1 - d_C(x_i, x)) plus (1 - lambda) times the mean
/// pairwise cosine distance of the difference vectors of the would-be set,
/// and takes the maximizer. With fewer than two elements the diversity term
/// is defined as 0.
inline std::vector<Exemplar> select_exemplars(const Neighborhood& neighborhood,
                                              ExemplarClass klass,
                                              std::size_t count, double lambda,
                                              bool* shortage = nullptr) {
  if (count < 1) throw ConfigError("select_exemplars: count must be >= 1");
  if (lambda < 0.0 || lambda > 1.0)
    throw ConfigError("select_exemplars: lambda must lie in [0, 1]");

  const auto space = LocalSpace::build(neighborhood);
  const int wanted_label = klass == ExemplarClass::factual
                               ? neighborhood.query_prediction.label
                               : 1 - neighborhood.query_prediction.label;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < neighborhood.members.size(); ++i)
    if (neighborhood.members[i].prediction.label == wanted_label)
      candidates.push_back(i);
  if (shortage != nullptr) *shortage = candidates.size() < count;

  // Difference vectors against the query bag.
  std::vector<SparseVector> deltas(neighborhood.members.size());
  for (std::size_t i : candidates) {
    SparseVector d(space.vocabulary.size());
    const auto& bag = space.member_bags[i];
    for (const auto& [col, v] : bag.entries())
      d.set(col, v - space.query_bag.at(col));
    for (const auto& [col, v] : space.query_bag.entries())
      if (bag.at(col) == 0.0) d.set(col, -v);
    deltas[i] = std::move(d);
  }

  std::vector<Exemplar> picked;
  std::vector<std::size_t> chosen;
  std::vector<bool> taken(neighborhood.members.size(), false);
  // Pairwise delta distances involving chosen members, accumulated lazily.
  std::vector<std::vector<double>> chosen_rows;
  double internal_pair_sum = 0.0;

  while (picked.size() < count) {
    double best_score = -std::numeric_limits<double>::infinity();
    double best_distance = 0.0;
    std::size_t best_index = neighborhood.members.size();
    for (std::size_t i : candidates) {
      if (taken[i]) continue;
      const double closeness = 1.0 - space.query_distance[i];
      double diversity = 0.0;
      if (!chosen.empty()) {
        double row_sum = 0.0;
        for (std::size_t r = 0; r < chosen.size(); ++r)
          row_sum += chosen_rows[r][i];
        const double pairs =
            static_cast<double>((chosen.size() + 1) * chosen.size()) / 2.0;
        diversity = (internal_pair_sum + row_sum) / pairs;
      }
      const double score = lambda * closeness + (1.0 - lambda) * diversity;
      const bool better =
          score > best_score ||
          (score == best_score &&
           space.query_distance[i] < best_distance);
      if (better) {
        best_score = score;
        best_distance = space.query_distance[i];
        best_index = i;
      }
    }
    if (best_index == neighborhood.members.size()) break;  // pool exhausted

    taken[best_index] = true;
    // Extend the internal pair sum and cache this member's distance row.
    for (std::size_t r = 0; r < chosen.size(); ++r)
      internal_pair_sum += chosen_rows[r][best_index];
    std::vector<double> row(neighborhood.members.size(), 0.0);
    for (std::size_t i : candidates)
      if (!taken[i])
        row[i] = cosine_distance(deltas[best_index], deltas[i]);
    chosen_rows.push_back(std::move(row));
    chosen.push_back(best_index);

    const auto& member = neighborhood.members[best_index];
    picked.push_back(
        {member.doc, member.prediction, space.query_distance[best_index]});
  }
  return picked;
}

struct Diagnostics {
  double r2 = 0.0;
  double fidelity = 0.0;
  std::size_t neighborhood_size = 0;
  std::array<std::size_t, 2> class_counts{0, 0};
  std::vector<std::string> flags;
};

/// The full explanation artifact for one query.
struct Explanation {
  std::string query;
  Prediction prediction;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<Attribution> intrinsic;
  std::vector<Attribution> extrinsic;
  std::vector<Exemplar> factuals;
  std::vector<Exemplar> counterfactuals;
  Diagnostics diagnostics;
  nlohmann::ordered_json config;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["query"] = query;
    j["label"] = prediction.label;
    j["score"] = prediction.score_positive;
    j["method"] = method;
    j["seed"] = seed;
    auto attribution_list = [](const std::vector<Attribution>& items) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& a : items)
        arr.push_back({{"token", a.token}, {"weight", a.weight}});
      return arr;
    };
    j["intrinsic"] = attribution_list(intrinsic);
    j["extrinsic"] = attribution_list(extrinsic);
    auto exemplar_list = [](const std::vector<Exemplar>& items) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& e : items)
        arr.push_back({{"text", e.doc.raw},
                       {"label", e.prediction.label},
                       {"score", e.prediction.score_positive},
                       {"distance", e.distance}});
      return arr;
    };
    j["factuals"] = exemplar_list(factuals);
    j["counterfactuals"] = exemplar_list(counterfactuals);
    j["diagnostics"] = {{"r2", diagnostics.r2},
                        {"fidelity", diagnostics.fidelity},
                        {"neighborhood_size", diagnostics.neighborhood_size},
                        {"class_counts",
                         {{"negative", diagnostics.class_counts[0]},
                          {"positive", diagnostics.class_counts[1]}}},
                        {"flags", diagnostics.flags}};
    j["config"] = config;
    return j;
  }

  static Explanation from_json(const nlohmann::ordered_json& j) {
    Explanation e;
    e.query = j.at("query").get<std::string>();
    e.prediction.label = j.at("label").get<int>();
    e.prediction.score_positive = j.at("score").get<double>();
    e.method = j.at("method").get<std::string>();
    e.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& a : j.at("intrinsic"))
      e.intrinsic.push_back({a.at("token").get<std::string>(),
                             a.at("weight").get<double>()});
    for (const auto& a : j.at("extrinsic"))
      e.extrinsic.push_back({a.at("token").get<std::string>(),
                             a.at("weight").get<double>()});
    auto read_exemplars = [](const nlohmann::ordered_json& arr) {
      std::vector<Exemplar> items;
      for (const auto& x : arr) {
        Exemplar e2;
        e2.doc = Document::from_raw(x.at("text").get<std::string>());
        e2.prediction.label = x.at("label").get<int>();
        e2.prediction.score_positive = x.at("score").get<double>();
        e2.distance = x.at("distance").get<double>();
        items.push_back(std::move(e2));
      }
      return items;
    };
    e.factuals = read_exemplars(j.at("factuals"));
    e.counterfactuals = read_exemplars(j.at("counterfactuals"));
    const auto& d = j.at("diagnostics");
    e.diagnostics.r2 = d.at("r2").get<double>();
    e.diagnostics.fidelity = d.at("fidelity").get<double>();
    e.diagnostics.neighborhood_size =
        d.at("neighborhood_size").get<std::size_t>();
    e.diagnostics.class_counts[0] =
        d.at("class_counts").at("negative").get<std::size_t>();
    e.diagnostics.class_counts[1] =
        d.at("class_counts").at("positive").get<std::size_t>();
    e.diagnostics.flags =
        d.at("flags").get<std::vector<std::string>>();
    e.config = j.at("config");
    return e;
  }
};

/// Saliency report: query tokens on blue (positive-leaning) or red
/// (negative-leaning) backgrounds with opacity proportional to |weight|.
/// Self-contained, no network assets.
inline std::string render_html(const Explanation& explanation) {
  double max_abs = 0.0;
  for (const auto& a : explanation.intrinsic)
    max_abs = std::max(max_abs, std::abs(a.weight));
  for (const auto& a : explanation.extrinsic)
    max_abs = std::max(max_abs, std::abs(a.weight));

  auto escape = [](const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
      }
    }
    return out;
  };
  auto span = [&](const std::string& token, double weight) {
    const double opacity =
        max_abs > 0.0 ? std::min(1.0, std::abs(weight) / max_abs) : 0.0;
    const char* color = weight >= 0.0 ? "0,90,255" : "255,40,40";
    std::ostringstream os;
    os << "<span style=\"background-color: rgba(" << color << "," << opacity
       << ")\" title=\"" << weight << "\">" << escape(token) << "</span>";
    return os.str();
  };

  std::ostringstream html;
  html << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
       << "<title>explanation</title>"
       << "<style>body{font-family:sans-serif;margin:2em}"
       << "span{padding:0 2px;border-radius:2px}"
       << "td{padding:2px 8px}</style></head><body>\n";
  html << "<h2>" << escape(explanation.method) << " &mdash; label "
       << explanation.prediction.label << " (score "
       << explanation.prediction.score_positive << ")</h2>\n<p>";
  std::unordered_set<std::string> emitted;
  const auto query_doc = Document::from_raw(explanation.query);
  for (const auto& t : query_doc.tokens) {
    double weight = 0.0;
    for (const auto& a : explanation.intrinsic)
      if (a.token == t) weight = a.weight;
    html << span(t, weight) << " ";
  }
  html << "</p>\n";
  if (!explanation.extrinsic.empty()) {
    html << "<h3>extrinsic words</h3>\n<p>";
    for (const auto& a : explanation.extrinsic)
      html << span(a.token, a.weight) << " ";
    html << "</p>\n";
  }
  auto table = [&](const char* title, const std::vector<Exemplar>& items) {
    html << "<h3>" << title << "</h3>\n<table>\n";
    for (const auto& e : items)
      html << "<tr><td>" << escape(e.doc.raw) << "</td><td>"
           << e.prediction.score_positive << "</td></tr>\n";
    html << "</table>\n";
  };
  table("factuals", explanation.factuals);
  table("counterfactuals", explanation.counterfactuals);
  html << "</body></html>\n";
  return html.str();
}

/// Everything reusable across explanations of one (corpus, black box) pair.
struct Resources {
  const Corpus* prototypes = nullptr;  // X_L
  TfIdfModel tfidf;                    // fitted on X_L
  std::vector<SparseVector> corpus_vectors;
  ContextModel context;
  BlackBox* blackbox = nullptr;
  Generator* generator = nullptr;  // required for the latent engine
};

inline Resources prepare_resources(const Corpus& prototypes, BlackBox& blackbox,
                                   std::size_t context_width = 1,
                                   Generator* generator = nullptr) {
  Resources r;
  r.prototypes = &prototypes;
  r.tfidf = TfIdfModel::fit(prototypes);
  r.corpus_vectors = vectorize_corpus(r.tfidf, prototypes);
  r.context = ContextModel::build(prototypes, context_width);
  r.blackbox = &blackbox;
  r.generator = generator;
  return r;
}

struct ExplainerConfig {
  std::string engine = "xprob";  // "xprob" | "xproa"
  std::size_t prototype_count = 80;      // xprob k
  std::size_t max_neighborhood = 400;    // xprob p
  std::size_t interpolation_steps = 10;  // xproa s
  std::size_t landmark_count = 20;       // xproa k
  std::size_t per_class = 200;           // xproa n
  std::size_t context_width = 1;
  double sigma = 1.0;
  double ridge = 1e-6;
  double lambda = 0.5;
  double eta = 0.1;
  std::size_t extrinsic_top = 3;
  std::size_t exemplar_count = 5;
  std::uint64_t seed = 0;
  bool outward_interpolation = false;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["engine"] = engine;
    j["k"] = engine == "xproa" ? landmark_count : prototype_count;
    j["p"] = max_neighborhood;
    j["s"] = interpolation_steps;
    j["n"] = per_class;
    j["ngram"] = context_width;
    j["sigma"] = sigma;
    j["ridge"] = ridge;
    j["lambda"] = lambda;
    j["eta"] = eta;
    j["m_extrinsic"] = extrinsic_top;
    j["exemplar_count"] = exemplar_count;
    j["seed"] = seed;
    j["outward_interpolation"] = outward_interpolation;
    j["version"] = kVersion;
    return j;
  }
};

inline Neighborhood build_neighborhood(const Document& query,
                                       Resources& resources,
                                       const ExplainerConfig& config) {
  if (config.engine == "xprob") {
    XprobConfig c;
    c.prototype_count = config.prototype_count;
    c.max_neighborhood = config.max_neighborhood;
    c.context_width = config.context_width;
    c.seed = config.seed;
    return construct_neighborhood_xprob(query, *resources.prototypes,
                                        resources.corpus_vectors,
                                        resources.tfidf, resources.context,
                                        *resources.blackbox, c);
  }
  if (config.engine == "xproa") {
    if (resources.generator == nullptr)
      throw ConfigError("the xproa engine requires a generator");
    XproaConfig c;
    c.interpolation_steps = config.interpolation_steps;
    c.landmark_count = config.landmark_count;
    c.per_class = config.per_class;
    c.seed = config.seed;
    c.outward_interpolation = config.outward_interpolation;
    return construct_neighborhood_xproa(query, *resources.prototypes,
                                        *resources.generator,
                                        *resources.blackbox, c);
  }
  throw ConfigError("unknown engine: " + config.engine);
}

/// The full pipeline: neighborhood, surrogate, attribution split, exemplars.
inline Explanation explain(const Document& query, Resources& resources,
                           const ExplainerConfig& config) {
  auto neighborhood = build_neighborhood(query, resources, config);
  const auto surrogate =
      fit_surrogate(neighborhood, config.sigma, config.ridge);
  auto [intrinsic, extrinsic] =
      split_attributions(surrogate, query, config.extrinsic_top);

  Explanation e;
  e.query = query.raw;
  e.prediction = neighborhood.query_prediction;
  e.method = neighborhood.method;
  e.seed = config.seed;
  e.intrinsic = std::move(intrinsic);
  e.extrinsic = std::move(extrinsic);
  bool factual_shortage = false, counterfactual_shortage = false;
  e.factuals = select_exemplars(neighborhood, ExemplarClass::factual,
                                config.exemplar_count, config.lambda,
                                &factual_shortage);
  e.counterfactuals = select_exemplars(neighborhood,
                                       ExemplarClass::counterfactual,
                                       config.exemplar_count, config.lambda,
                                       &counterfactual_shortage);
  e.diagnostics.r2 = surrogate.r2;
  e.diagnostics.fidelity = surrogate.fidelity;
  e.diagnostics.neighborhood_size = neighborhood.members.size();
  e.diagnostics.class_counts = neighborhood.class_counts;
  e.diagnostics.flags = neighborhood.flags;
  for (const auto& f : surrogate.flags)
    if (std::find(e.diagnostics.flags.begin(), e.diagnostics.flags.end(), f) ==
        e.diagnostics.flags.end())
      e.diagnostics.flags.push_back(f);
  if (factual_shortage) e.diagnostics.flags.push_back(flag::kFactualShortage);
  if (counterfactual_shortage)
    e.diagnostics.flags.push_back(flag::kCounterfactualShortage);
  e.config = config.to_json();
  return e;
}

inline Explanation explain(const std::string& query_text, Resources& resources,
                           const ExplainerConfig& config) {
  return explain(Document::from_raw(query_text), resources, config);
}

}  // namespace xproab
