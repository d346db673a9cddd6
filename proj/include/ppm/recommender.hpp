#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ppm/dtree.hpp"

namespace ppm {

/// Weights of the recommendation score. Kept as exact tenths when built from the grid.
struct LambdaWeights {
  double l1 = 0.4;  // fitness
  double l2 = 0.4;  // purity
  double l3 = 0.2;  // share of positive samples

  void validate() const;
  nlohmann::json to_json() const;
  static LambdaWeights from_json(const nlohmann::json& j);
  auto operator<=>(const LambdaWeights&) const = default;
};

/// All (i, j, k)/10 with i + j + k = 10, lexicographic in (i, j).
std::vector<LambdaWeights> lambda_grid();

enum class RecCondition : std::uint8_t {
  ShouldBecomeSatisfied,
  ShouldNotBeViolated,
  ShouldNotBeSatisfied,
  ShouldBecomeViolated,
};

std::string_view condition_text(RecCondition c);

/// 1, 0.5 or 0 depending on how far the observed state is from the learned value.
double compliance(bool learned_satisfied, RVState rv);
/// Recommendation for one path step; nullopt when the state is already final.
std::optional<RecCondition> recommendation_for(bool learned_satisfied, RVState rv);

/// Mean compliance over the path's steps; a path without steps has fitness 1.
double fitness(std::span<const std::string> prefix, const DtPath& path, bool done);
/// Impurity clamped to [0,1]; two-class gini and entropy in bits already lie there.
double normalized_impurity(double impurity);
double rho(double fitness_value, const DtPath& path, const LambdaWeights& lambda, int positive_total);

struct Recommendation {
  Constraint constraint;
  RecCondition condition;
  int priority = 0;  // 1 is the highest
};

struct RecommendationResult {
  std::vector<Recommendation> recommendations;
  DtPath chosen_path;
  std::size_t path_index = 0;  // into Recommender::positive_paths()
  double rho = 0;
  double fitness = 0;
  std::vector<std::pair<Constraint, RVState>> rv_snapshot;  // every step of the chosen path

  nlohmann::json to_json() const;
};

/// Holds the positive paths of a tree; immutable and safe to share across threads.
class Recommender {
public:
  Recommender(const DecisionTree& tree, LambdaWeights lambda, int min_path_samples = 3);

  /// Positive paths with at least min_path_samples training samples, depth-first order.
  const std::vector<DtPath>& positive_paths() const noexcept { return positive_; }
  int positive_total() const noexcept { return positive_total_; }
  const LambdaWeights& lambda() const noexcept { return lambda_; }

  /// Index into positive_paths() of the highest-scoring path; ties prefer fewer
  /// steps, then depth-first order. Throws NoPositivePath.
  std::size_t best_positive_path(std::span<const std::string> prefix) const;
  std::size_t best_positive_path(std::span<const double> fitness_per_path) const;
  RecommendationResult generate(std::span<const std::string> prefix) const;

private:
  LambdaWeights lambda_;
  std::vector<DtPath> positive_;
  int positive_total_ = 0;
};

DtPath best_positive_path(std::span<const std::string> prefix, const DecisionTree& tree, const LambdaWeights& lambda,
                          int min_path_samples = 3);
RecommendationResult generate(std::span<const std::string> prefix, const DecisionTree& tree,
                              const LambdaWeights& lambda, int min_path_samples = 3);

}  // namespace ppm
