#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "ppm/dtree.hpp"
#include "ppm/evaluator.hpp"
#include "ppm/logio.hpp"
#include "ppm/recommender.hpp"

namespace ppm {

/// "E", "C", "PR", "NR" or "A"; every family except A also carries E.
std::set<Family> families_from_option(std::string_view option);
std::string families_option(const std::set<Family>& families);

struct ModelBundle {
  DecisionTree tree;
  LambdaWeights lambda;
  double th_fit = 0.75;
  int min_path_samples = 3;
  std::set<std::string> alphabet;
  std::set<Family> families;
  std::string dataset_name;
  std::string trained_at;  // latest training event, so retraining is reproducible
  std::size_t prefix_cap = 40;
  double cv_f_score = 0;
  LabelSpec label;
  SplitConfig split;

  const ConstraintUniverse& universe() const noexcept { return tree.universe; }
  nlohmann::json to_json() const;
  static ModelBundle from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static ModelBundle load(const std::filesystem::path& path);
};

struct TrainConfig {
  std::string dataset_name;
  LabelSpec label;
  std::set<Family> families{Family::E};
  std::set<int> existence_ns{1};
  double apriori_support = 0.05;
  SplitConfig split;
  HyperparameterGrid grid;
  int folds = 5;
  std::uint64_t seed = 42;
  EvalConfig eval;
  std::optional<std::size_t> prefix_cap;  // overrides the per-dataset rule
  bool tune = true;                       // lambda and th_fit grid search on validation prefixes
};

/// Label, split, encode, select features, fit the tree and tune lambda and th_fit.
ModelBundle train_model(const EventLog& raw_log, const TrainConfig& cfg);

/// Repeats the model's preprocessing and split on `raw_log`, then evaluates
/// the test prefixes.
MetricsReport evaluate_model(const ModelBundle& model, const EventLog& raw_log);

}  // namespace ppm
