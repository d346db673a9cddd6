#include "ppm/recommender.hpp"

#include <algorithm>
#include <cmath>

#include "ppm/error.hpp"

namespace ppm {

void LambdaWeights::validate() const {
  if (l1 < 0 || l2 < 0 || l3 < 0) throw Error(ErrorKind::InvalidArgument, "lambda weights must be non-negative");
  if (std::abs(l1 + l2 + l3 - 1.0) > 1e-9) throw Error(ErrorKind::InvalidArgument, "lambda weights must sum to 1");
}

nlohmann::json LambdaWeights::to_json() const { return nlohmann::json::array({l1, l2, l3}); }

LambdaWeights LambdaWeights::from_json(const nlohmann::json& j) {
  LambdaWeights w;
  if (j.is_array() && j.size() == 3) {
    w = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } else if (j.is_object()) {
    w = {j.at("l1").get<double>(), j.at("l2").get<double>(), j.at("l3").get<double>()};
  } else {
    throw Error(ErrorKind::InvalidArgument, "lambda must be a 3-element array");
  }
  w.validate();
  return w;
}

std::vector<LambdaWeights> lambda_grid() {
  std::vector<LambdaWeights> out;
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; i + j <= 10; ++j) out.push_back({i / 10.0, j / 10.0, (10 - i - j) / 10.0});
  return out;
}

std::string_view condition_text(RecCondition c) {
  switch (c) {
    case RecCondition::ShouldBecomeSatisfied: return "SHOULD BECOME SATISFIED";
    case RecCondition::ShouldNotBeViolated: return "SHOULD NOT BE VIOLATED";
    case RecCondition::ShouldNotBeSatisfied: return "SHOULD NOT BE SATISFIED";
    case RecCondition::ShouldBecomeViolated: return "SHOULD BECOME VIOLATED";
  }
  return "";
}

double compliance(bool learned_satisfied, RVState rv) {
  if (learned_satisfied) {
    switch (rv) {
      case RVState::Satisfied:
      case RVState::PossiblySatisfied: return 1.0;
      case RVState::PossiblyViolated: return 0.5;
      case RVState::Violated: return 0.0;
    }
  } else {
    switch (rv) {
      case RVState::Violated:
      case RVState::PossiblyViolated: return 1.0;
      case RVState::PossiblySatisfied: return 0.5;
      case RVState::Satisfied: return 0.0;
    }
  }
  return 0.0;
}

std::optional<RecCondition> recommendation_for(bool learned_satisfied, RVState rv) {
  if (rv == RVState::PossiblyViolated)
    return learned_satisfied ? RecCondition::ShouldBecomeSatisfied : RecCondition::ShouldNotBeSatisfied;
  if (rv == RVState::PossiblySatisfied)
    return learned_satisfied ? RecCondition::ShouldNotBeViolated : RecCondition::ShouldBecomeViolated;
  return std::nullopt;
}

double fitness(std::span<const std::string> prefix, const DtPath& path, bool done) {
  if (path.steps.empty()) return 1.0;
  double sum = 0;
  for (const auto& s : path.steps) sum += compliance(s.satisfied, rv_state(s.constraint, count_stats(s.constraint, prefix, done)));
  return sum / static_cast<double>(path.steps.size());
}

double normalized_impurity(double impurity) { return std::clamp(impurity, 0.0, 1.0); }

double rho(double fitness_value, const DtPath& path, const LambdaWeights& lambda, int positive_total) {
  const double share = positive_total > 0 ? static_cast<double>(path.pos) / positive_total : 0.0;
  return lambda.l1 * fitness_value + lambda.l2 * (1.0 - normalized_impurity(path.impurity)) + lambda.l3 * share;
}

nlohmann::json RecommendationResult::to_json() const {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : recommendations)
    recs.push_back({{"constraint", r.constraint.to_string()},
                    {"condition", condition_text(r.condition)},
                    {"priority", r.priority}});
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : chosen_path.steps)
    steps.push_back({{"constraint", s.constraint.to_string()}, {"value", s.satisfied ? "satisfied" : "violated"}});
  nlohmann::json snapshot = nlohmann::json::array();
  for (const auto& [c, s] : rv_snapshot)
    snapshot.push_back({{"constraint", c.to_string()}, {"state", rv_name(s)}, {"code", code(s)}});
  return {{"recommendations", recs},
          {"chosen_path",
           {{"nodes", chosen_path.node_ids},
            {"steps", steps},
            {"polarity", chosen_path.polarity},
            {"impurity", chosen_path.impurity},
            {"pos_samples", chosen_path.pos},
            {"neg_samples", chosen_path.neg}}},
          {"rho", rho},
          {"fitness", fitness},
          {"rv_snapshot", snapshot}};
}

Recommender::Recommender(const DecisionTree& tree, LambdaWeights lambda, int min_path_samples) : lambda_(lambda) {
  lambda_.validate();
  for (auto& p : extract_paths(tree))
    if (p.polarity == 1 && p.samples() >= min_path_samples) positive_.push_back(std::move(p));
  for (const auto& p : positive_) positive_total_ += p.pos;
}

std::size_t Recommender::best_positive_path(std::span<const double> fitness_per_path) const {
  if (positive_.empty()) throw Error(ErrorKind::NoPositivePath, "tree has no positive path with enough samples");
  std::size_t best = 0;
  double best_rho = rho(fitness_per_path[0], positive_[0], lambda_, positive_total_);
  for (std::size_t i = 1; i < positive_.size(); ++i) {
    const double r = rho(fitness_per_path[i], positive_[i], lambda_, positive_total_);
    if (r > best_rho + 1e-12 ||
        (std::abs(r - best_rho) <= 1e-12 && positive_[i].steps.size() < positive_[best].steps.size())) {
      best = i;
      best_rho = r;
    }
  }
  return best;
}

std::size_t Recommender::best_positive_path(std::span<const std::string> prefix) const {
  if (positive_.empty()) throw Error(ErrorKind::NoPositivePath, "tree has no positive path with enough samples");
  std::vector<double> fit;
  fit.reserve(positive_.size());
  for (const auto& p : positive_) fit.push_back(fitness(prefix, p, false));
  return best_positive_path(fit);
}

RecommendationResult Recommender::generate(std::span<const std::string> prefix) const {
  RecommendationResult out;
  out.path_index = best_positive_path(prefix);
  out.chosen_path = positive_[out.path_index];
  out.fitness = fitness(prefix, out.chosen_path, false);
  out.rho = rho(out.fitness, out.chosen_path, lambda_, positive_total_);
  int priority = 0;
  for (const auto& s : out.chosen_path.steps) {
    ++priority;
    const RVState rv = rv_state(s.constraint, count_stats(s.constraint, prefix, false));
    out.rv_snapshot.emplace_back(s.constraint, rv);
    if (auto cond = recommendation_for(s.satisfied, rv)) out.recommendations.push_back({s.constraint, *cond, priority});
  }
  return out;
}

DtPath best_positive_path(std::span<const std::string> prefix, const DecisionTree& tree, const LambdaWeights& lambda,
                          int min_path_samples) {
  Recommender r(tree, lambda, min_path_samples);
  return r.positive_paths()[r.best_positive_path(prefix)];
}

RecommendationResult generate(std::span<const std::string> prefix, const DecisionTree& tree,
                              const LambdaWeights& lambda, int min_path_samples) {
  return Recommender(tree, lambda, min_path_samples).generate(prefix);
}

}  // namespace ppm
