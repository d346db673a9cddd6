#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppm/encoder.hpp"

namespace ppm {

enum class Criterion : std::uint8_t { Gini, Entropy };
enum class ClassWeight : std::uint8_t { None, Balanced };

/// Either a fraction of the fitted rows (rounded up) or an absolute count.
struct MinSamplesSplit {
  bool fraction = false;
  double value = 2;

  std::size_t resolve(std::size_t n_rows) const;
  bool operator==(const MinSamplesSplit&) const = default;
};

struct Hyperparameters {
  Criterion criterion = Criterion::Gini;
  std::optional<int> max_depth;  // nullopt = unbounded
  ClassWeight class_weight = ClassWeight::None;
  MinSamplesSplit min_samples_split;
  int min_samples_leaf = 1;
  TopH top_h = TopH::Half;

  nlohmann::json to_json() const;
  static Hyperparameters from_json(const nlohmann::json& j);
  std::string to_string() const;
  bool operator==(const Hyperparameters&) const = default;
};

struct HyperparameterGrid {
  std::vector<Criterion> criterion{Criterion::Gini, Criterion::Entropy};
  std::vector<std::optional<int>> max_depth{4, 6, 8, 10, std::nullopt};
  std::vector<ClassWeight> class_weight{ClassWeight::None, ClassWeight::Balanced};
  std::vector<MinSamplesSplit> min_samples_split{{true, 0.1}, {true, 0.2}, {true, 0.3}, {false, 2}};
  std::vector<int> min_samples_leaf{1, 10, 16};
  std::vector<TopH> top_h{TopH::Half, TopH::Thirty, TopH::Sqrt};

  std::size_t size() const;
  /// Enumeration order; criterion varies slowest, top_h fastest.
  std::vector<Hyperparameters> points() const;
  static HyperparameterGrid single(const Hyperparameters& hp);
};

struct TreeNode {
  int feature = -1;      // column tested; -1 for leaves
  int true_child = -1;   // branch taken when the feature is satisfied
  int false_child = -1;
  int depth = 0;
  int pos = 0;           // raw training counts, never weighted
  int neg = 0;
  double impurity = 0;   // from raw counts; gini, or entropy in bits
  int polarity = 0;      // weighted majority class, ties to 0

  bool is_leaf() const noexcept { return feature < 0; }
  int samples() const noexcept { return pos + neg; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // pre-order, satisfied branch first; root at 0
  ConstraintUniverse universe;  // column meaning of `feature`
  Hyperparameters hp;

  /// Index of the leaf reached by `row`; only code 1 (Satisfied) takes the true branch.
  std::size_t leaf_of(std::span<const std::uint8_t> row) const;
  int predict(std::span<const std::uint8_t> row) const;
  /// Prediction of the tree that induction would build with a tighter depth
  /// and split bound, read off this deeper tree.
  int predict_truncated(std::span<const std::uint8_t> row, std::optional<int> max_depth,
                        std::size_t min_split_count) const;

  int depth() const;
  std::size_t leaf_count() const;

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& j);
};

/// CART induction on binary features; splits are "feature is satisfied".
DecisionTree induce(const EncodedDataset& data, const Hyperparameters& hp);

struct PathStep {
  std::size_t column = 0;
  Constraint constraint;
  bool satisfied = false;  // learned value on this branch
};

struct DtPath {
  std::vector<PathStep> steps;  // root to leaf
  std::vector<int> node_ids;    // root to leaf, including the leaf
  int polarity = 0;
  double impurity = 0;
  int pos = 0;
  int neg = 0;

  int samples() const noexcept { return pos + neg; }
  std::string to_string() const;
};

/// One path per leaf, depth-first with the satisfied branch first.
std::vector<DtPath> extract_paths(const DecisionTree& tree);

struct FoldScore {
  Hyperparameters hp;
  double mean_f = 0;
};

struct GridSearchResult {
  Hyperparameters best;
  double best_score = 0;
  DecisionTree tree;  // refit on all rows with the selected features
  std::vector<FoldScore> scores;
};

/// Stratified k-fold assignment from a seeded shuffle; result[i] is row i's fold.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

/// Positive-class F-score, with 0/0 taken as 0.
double f_score(std::span<const int> truth, std::span<const int> predicted);

/// Features are re-ranked by mutual information inside every fold. Ties in
/// mean F keep the earliest grid point.
GridSearchResult grid_search_cv(const EncodedDataset& train, const HyperparameterGrid& grid, int folds = 5,
                                std::uint64_t seed = 42);

}  // namespace ppm
