#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "ppm/model.hpp"

namespace ppm::testing {

// ---------------------------------------------------------------------------
// Sepsis running example: 12 activities, 24 existence-family features and a
// hand-built entropy tree with three positive leaves (460, 37 and 36/15).

std::vector<std::string> sepsis_activities();
ConstraintUniverse sepsis_universe();
DecisionTree sepsis_tree();
ModelBundle sepsis_model();
std::vector<std::string> sigma15();
std::vector<std::string> sigma5();
std::filesystem::path fixture_dir();

// ---------------------------------------------------------------------------
// Synthetic labelled log. Traces are ordered in time by case index; the label
// is 1 unless "escalate" occurs without a later "review", flipped with
// probability `noise`.

struct SyntheticSpec {
  std::size_t traces = 300;
  std::size_t min_len = 4;
  std::size_t max_len = 14;
  double noise = 0.05;
  std::uint64_t seed = 7;
};

EventLog synthetic_log(const SyntheticSpec& spec = {});
std::vector<std::string> synthetic_activities();

// ---------------------------------------------------------------------------
// Reference LTLf evaluator: its own tokenizer and a direct recursive reading
// of the finite-trace semantics, sharing no code with the library.

class OracleFormula {
public:
  struct Node;
  explicit OracleFormula(const std::string& text);
  bool holds(const std::vector<std::string>& trace) const;

private:
  std::shared_ptr<const Node> root_;
};

/// Table of template formulas written with placeholders A and B.
std::string oracle_formula_text(Template t, int n);
/// Substitutes quoted activity names for the placeholders.
std::string instantiate(const std::string& pattern, const std::string& a, const std::string& b);

}  // namespace ppm::testing
