#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ppm/logio.hpp"
#include "ppm/recommender.hpp"

namespace ppm {

enum class Outcome : std::uint8_t { TP, FP, TN, FN };

std::string_view outcome_name(Outcome o);

/// Positive side when fitness >= th (inclusive).
Outcome whatif_classify(double full_trace_fitness, int label, double th_fit);
Outcome whatif_classify(const Trace& full_trace, const DtPath& chosen_path, double th_fit);

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  void add(Outcome o);
  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  bool operator==(const ConfusionMatrix&) const = default;
};

struct Scores {
  double precision = 0;
  double recall = 0;
  double f_score = 0;
};

/// Any 0/0 ratio is 0.
Scores metrics(const ConfusionMatrix& cm);

struct EvalConfig {
  double th_fit = 0.75;
  std::vector<double> th_fit_grid{0.55, 0.65, 0.75, 0.85};
  int min_path_samples = 3;
};

struct MetricsReport {
  std::map<std::size_t, ConfusionMatrix> per_k;
  std::map<std::size_t, ConfusionMatrix> cumulative;  // sums over j <= k
  std::map<std::size_t, Scores> cumulative_scores;
  double average_f = 0;  // mean of cumulative F over k
  std::size_t no_positive_path = 0;
  std::map<std::size_t, std::vector<double>> timings_ms;  // generation time per prefix, by k

  /// Deterministic content only; timings are excluded.
  nlohmann::json to_json() const;
};

/// Recomputes cumulative sums, scores and average_f from per_k.
void finalize(MetricsReport& report);

MetricsReport run_evaluation(const PrefixLog& prefixes, const DecisionTree& tree, const LambdaWeights& lambda,
                             const EvalConfig& cfg);

struct TuningResult {
  LambdaWeights lambda;
  double th_fit = 0;
  double average_f = 0;
};

/// Joint search; ties go to the lower threshold, then the lexicographically smaller lambda.
TuningResult tune_thresholds(const PrefixLog& val_prefixes, const DecisionTree& tree,
                             std::span<const LambdaWeights> lambda_grid, std::span<const double> th_grid,
                             int min_path_samples = 3);

/// Writes metrics.json, cumulative_fscore.csv, timings.csv and summary.txt.
void emit_report(const MetricsReport& report, const std::filesystem::path& dir);

/// Spearman rank correlation with average ranks for ties; 0 when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

/// Order statistic by nearest rank; q in (0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace ppm
