#include <doctest.h>

#include <cmath>
#include <random>

#include "ppm/error.hpp"
#include "ppm/recommender.hpp"
#include "support.hpp"

using namespace ppm;

namespace {

// Score written out from its definition, with the fixture's entropy impurity
// computed afresh and the positive total of the three positive leaves.
double expected_rho(double fit, int pos, int neg, double l1, double l2, double l3) {
  const double n = pos + neg;
  double h = 0;
  for (int c : {pos, neg})
    if (c > 0) h -= (c / n) * std::log2(c / n);
  return l1 * fit + l2 * (1 - h) + l3 * pos / 533.0;
}

const DtPath& path_with_leaf(const Recommender& r, int pos) {
  for (const auto& p : r.positive_paths())
    if (p.pos == pos) return p;
  throw std::runtime_error("no such path");
}

}  // namespace

TEST_CASE("recommender: compliance table") {
  CHECK(compliance(true, RVState::Satisfied) == 1.0);
  CHECK(compliance(true, RVState::PossiblySatisfied) == 1.0);
  CHECK(compliance(true, RVState::PossiblyViolated) == 0.5);
  CHECK(compliance(true, RVState::Violated) == 0.0);
  CHECK(compliance(false, RVState::Violated) == 1.0);
  CHECK(compliance(false, RVState::PossiblyViolated) == 1.0);
  CHECK(compliance(false, RVState::PossiblySatisfied) == 0.5);
  CHECK(compliance(false, RVState::Satisfied) == 0.0);
  CHECK(recommendation_for(true, RVState::PossiblyViolated) == RecCondition::ShouldBecomeSatisfied);
  CHECK(recommendation_for(true, RVState::PossiblySatisfied) == RecCondition::ShouldNotBeViolated);
  CHECK(recommendation_for(false, RVState::PossiblyViolated) == RecCondition::ShouldNotBeSatisfied);
  CHECK(recommendation_for(false, RVState::PossiblySatisfied) == RecCondition::ShouldBecomeViolated);
  CHECK_FALSE(recommendation_for(true, RVState::Satisfied));
  CHECK_FALSE(recommendation_for(false, RVState::Violated));
  CHECK(condition_text(RecCondition::ShouldNotBeViolated) == "SHOULD NOT BE VIOLATED");
}

TEST_CASE("recommender: positive paths of the fixture tree") {
  const Recommender r(testing::sepsis_tree(), {0.4, 0.4, 0.2});
  REQUIRE(r.positive_paths().size() == 3);
  CHECK(r.positive_total() == 533);
  CHECK(r.positive_paths()[0].pos == 460);
  CHECK(r.positive_paths()[1].pos == 37);
  CHECK(r.positive_paths()[2].pos == 36);
  CHECK(r.positive_paths()[2].steps.size() == 4);

  const Recommender strict(testing::sepsis_tree(), {0.4, 0.4, 0.2}, 40);
  CHECK(strict.positive_paths().size() == 2);
  CHECK(strict.positive_total() == 496);
}

TEST_CASE("recommender: fitness of the worked prefixes") {
  const Recommender r(testing::sepsis_tree(), {0.4, 0.4, 0.2});
  const auto s5 = testing::sigma5(), s15 = testing::sigma15();
  CHECK(fitness(s5, path_with_leaf(r, 460), false) == doctest::Approx(0.5));
  CHECK(fitness(s5, path_with_leaf(r, 37), false) == doctest::Approx(2.0 / 3));
  CHECK(fitness(s5, path_with_leaf(r, 36), false) == doctest::Approx(0.875));
  CHECK(fitness(s15, path_with_leaf(r, 37), false) == doctest::Approx(1.0));
  CHECK(fitness(s15, path_with_leaf(r, 36), false) == doctest::Approx(0.875));
  CHECK(fitness(s15, path_with_leaf(r, 460), false) == doctest::Approx(0.5));
  CHECK(fitness(s5, DtPath{}, false) == 1.0);
}

TEST_CASE("recommender: score arithmetic") {
  DtPath p;
  p.pos = 50;
  p.neg = 0;
  p.impurity = 0.2;
  CHECK(rho(0.9, p, {0.5, 0.3, 0.2}, 100) == doctest::Approx(0.45 + 0.24 + 0.1));
  CHECK(rho(0.8, p, {1, 0, 0}, 100) == doctest::Approx(0.8));
  CHECK(rho(0.8, p, {0, 0, 1}, 0) == 0.0);
  CHECK(normalized_impurity(1.3) == 1.0);

  const Recommender r(testing::sepsis_tree(), {0.4, 0.4, 0.2});
  const auto s5 = testing::sigma5();
  const auto& p460 = path_with_leaf(r, 460);
  const auto& p37 = path_with_leaf(r, 37);
  const auto& p36 = path_with_leaf(r, 36);
  CHECK(rho(0.5, p460, r.lambda(), 533) == doctest::Approx(expected_rho(0.5, 460, 0, 0.4, 0.4, 0.2)));
  CHECK(rho(2.0 / 3, p37, r.lambda(), 533) == doctest::Approx(expected_rho(2.0 / 3, 37, 0, 0.4, 0.4, 0.2)));
  CHECK(rho(0.875, p36, r.lambda(), 533) == doctest::Approx(expected_rho(0.875, 36, 15, 0.4, 0.4, 0.2)));
  // Reference values, rounded to five places.
  CHECK(rho(fitness(s5, p460, false), p460, r.lambda(), 533) == doctest::Approx(0.77261).epsilon(1e-4));
  CHECK(rho(fitness(s5, p37, false), p37, r.lambda(), 533) == doctest::Approx(0.68055).epsilon(1e-4));
  CHECK(rho(fitness(s5, p36, false), p36, r.lambda(), 533) == doctest::Approx(0.41392).epsilon(1e-4));
}

TEST_CASE("recommender: worked recommendations") {
  const Recommender r(testing::sepsis_tree(), {0.4, 0.4, 0.2});
  const auto res15 = r.generate(testing::sigma15());
  CHECK(res15.chosen_path.pos == 37);
  CHECK(res15.rho == doctest::Approx(0.81388).epsilon(1e-4));
  CHECK(res15.fitness == 1.0);
  REQUIRE(res15.recommendations.size() == 2);
  CHECK(res15.recommendations[0].constraint == Constraint::unary(Template::Existence, "Release A", 1));
  CHECK(res15.recommendations[0].condition == RecCondition::ShouldNotBeSatisfied);
  CHECK(res15.recommendations[0].priority == 1);
  CHECK(res15.recommendations[1].constraint == Constraint::unary(Template::Exactly, "Release B", 1));
  CHECK(res15.recommendations[1].condition == RecCondition::ShouldNotBeViolated);
  CHECK(res15.recommendations[1].priority == 3);
  CHECK(res15.rv_snapshot.size() == 3);

  const auto res5 = r.generate(testing::sigma5());
  CHECK(res5.chosen_path.pos == 460);
  REQUIRE(res5.recommendations.size() == 1);
  CHECK(res5.recommendations[0].constraint == Constraint::unary(Template::Existence, "Release A", 1));
  CHECK(res5.recommendations[0].condition == RecCondition::ShouldBecomeSatisfied);

  const auto j = res15.to_json();
  CHECK(j["recommendations"][1]["condition"] == "SHOULD NOT BE VIOLATED");
  CHECK(j["chosen_path"]["pos_samples"] == 37);
  CHECK(j["rv_snapshot"][2]["code"] == 3);
}

TEST_CASE("recommender: following the recommendations completes the path") {
  const Recommender r(testing::sepsis_tree(), {0.4, 0.4, 0.2});
  auto s5 = testing::sigma5();
  s5.push_back("Release A");
  const auto after = r.generate(s5);
  CHECK(after.recommendations.empty());
  CHECK(after.fitness == 1.0);

  // Closing sigma15 without Release A and without a second Release B.
  const auto chosen = r.generate(testing::sigma15()).chosen_path;
  CHECK(fitness(testing::sigma15(), chosen, true) == 1.0);
  auto bad = testing::sigma15();
  bad.push_back("Release B");
  CHECK(fitness(bad, chosen, true) < 1.0);
}

TEST_CASE("recommender: a compliant prefix gets no advice") {
  const auto res = generate(std::vector<std::string>{"Release A"}, testing::sepsis_tree(), {0.4, 0.4, 0.2});
  CHECK(res.recommendations.empty());
  CHECK(res.fitness == 1.0);
  CHECK(res.chosen_path.pos == 460);
}

TEST_CASE("recommender: ties prefer shorter paths") {
  const Recommender r(testing::sepsis_tree(), {1, 0, 0});
  const std::vector<double> fit{0.5, 1.0, 1.0};
  CHECK(r.best_positive_path(fit) == 1);
  const std::vector<double> all_equal{1.0, 1.0, 1.0};
  CHECK(r.best_positive_path(all_equal) == 0);
}

TEST_CASE("recommender: lambda extremes") {
  const auto s5 = testing::sigma5();
  // Fitness only: path 36 is the best match for sigma5.
  CHECK(best_positive_path(s5, testing::sepsis_tree(), {1, 0, 0}).pos == 36);
  // Support only: the largest leaf.
  CHECK(best_positive_path(s5, testing::sepsis_tree(), {0, 0, 1}).pos == 460);
  // Purity only: 460 and 37 are pure; the shorter wins.
  CHECK(best_positive_path(s5, testing::sepsis_tree(), {0, 1, 0}).pos == 460);
}

TEST_CASE("recommender: scores stay in the unit interval") {
  const auto tree = testing::sepsis_tree();
  const auto acts = testing::sepsis_activities();
  std::mt19937_64 rng(3);
  for (const auto& lambda : lambda_grid()) {
    const Recommender r(tree, lambda);
    for (int i = 0; i < 20; ++i) {
      std::vector<std::string> prefix(1 + rng() % 12);
      for (auto& a : prefix) a = acts[rng() % acts.size()];
      const auto res = r.generate(prefix);
      CHECK(res.rho >= 0.0);
      CHECK(res.rho <= 1.0 + 1e-12);
      CHECK(res.fitness >= 0.0);
      CHECK(res.fitness <= 1.0);
      if (lambda == LambdaWeights{1, 0, 0}) CHECK(res.rho == doctest::Approx(res.fitness));
      // The chosen path scores at least as well as every other positive path.
      for (const auto& p : r.positive_paths())
        CHECK(rho(fitness(prefix, p, false), p, lambda, r.positive_total()) <= res.rho + 1e-12);
    }
  }
}

TEST_CASE("recommender: lambda grid") {
  const auto g = lambda_grid();
  CHECK(g.size() == 66);
  for (const auto& w : g) CHECK_NOTHROW(w.validate());
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK_THROWS_AS((LambdaWeights{0.5, 0.5, 0.5}.validate()), Error);
  CHECK(LambdaWeights::from_json(nlohmann::json::array({0.2, 0.3, 0.5})) == LambdaWeights{0.2, 0.3, 0.5});
}

TEST_CASE("recommender: no positive path") {
  DecisionTree t;
  TreeNode leaf;
  leaf.pos = 1;
  leaf.neg = 9;
  t.nodes = {leaf};
  const Recommender r(t, {});
  CHECK(r.positive_paths().empty());
  try {
    r.generate(std::vector<std::string>{"a"});
    FAIL("expected NoPositivePath");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoPositivePath);
  }
}
