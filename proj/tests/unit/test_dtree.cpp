#include <doctest.h>

#include <random>

#include "ppm/dtree.hpp"
#include "ppm/error.hpp"
#include "support.hpp"

using namespace ppm;

namespace {

EncodedDataset dataset(const std::vector<std::vector<std::uint8_t>>& rows, std::vector<int> labels) {
  EncodedDataset d;
  d.rows = rows.size();
  d.cols = rows.front().size();
  for (std::size_t c = 0; c < d.cols; ++c)
    d.universe.constraints.push_back(Constraint::unary(Template::Existence, "f" + std::to_string(c), 1));
  for (const auto& r : rows) d.matrix.insert(d.matrix.end(), r.begin(), r.end());
  d.labels = std::move(labels);
  for (std::size_t r = 0; r < d.rows; ++r) d.row_ids.push_back(std::to_string(r));
  return d;
}

EncodedDataset random_dataset(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::uint8_t>> m(rows, std::vector<std::uint8_t>(cols));
  std::vector<int> labels(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto& v : m[r]) v = static_cast<std::uint8_t>(rng() % 2);
    // Label depends on a few columns plus noise.
    labels[r] = ((m[r][0] && !m[r][1]) || m[r][2]) ^ (rng() % 10 == 0);
  }
  return dataset(m, labels);
}

std::size_t walk_path(const DtPath& p, std::span<const std::uint8_t> row) {
  for (const auto& s : p.steps)
    if ((row[s.column] == 1) != s.satisfied) return 0;
  return 1;
}

}  // namespace

TEST_CASE("dtree: a separating feature gives a depth-one pure tree") {
  auto d = dataset({{0, 1}, {1, 1}, {0, 0}, {1, 0}}, {0, 1, 0, 1});
  auto t = induce(d, {});
  CHECK(t.depth() == 1);
  CHECK(t.leaf_count() == 2);
  CHECK(t.nodes[0].feature == 0);
  for (const auto& n : t.nodes)
    if (n.is_leaf()) CHECK(n.impurity == 0.0);
  CHECK(t.predict(std::vector<std::uint8_t>{1, 0}) == 1);
  CHECK(t.predict(std::vector<std::uint8_t>{0, 0}) == 0);
  // Possibly-satisfied codes follow the "not satisfied" branch.
  CHECK(t.predict(std::vector<std::uint8_t>{3, 0}) == 0);
  CHECK_THROWS_AS(t.predict(std::vector<std::uint8_t>{1}), Error);
  auto paths = extract_paths(t);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].steps.size() == 1);
  CHECK(paths[0].steps[0].satisfied);
  CHECK(paths[0].polarity == 1);
}

TEST_CASE("dtree: identical rows give a single majority leaf") {
  auto d = dataset({{1, 0}, {1, 0}, {1, 0}}, {1, 0, 1});
  auto t = induce(d, {});
  CHECK(t.leaf_count() == 1);
  CHECK(t.nodes[0].polarity == 1);
  auto paths = extract_paths(t);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].steps.empty());

  std::vector<std::string> warnings;
  set_warning_sink([&](std::string_view w) { warnings.emplace_back(w); });
  auto single = induce(dataset({{1}, {0}}, {0, 0}), {});
  set_warning_sink(nullptr);
  CHECK(single.leaf_count() == 1);
  CHECK(single.nodes[0].polarity == 0);
  CHECK(warnings.size() == 1);
}

TEST_CASE("dtree: an unpruned tree reproduces distinct training rows") {
  std::vector<std::vector<std::uint8_t>> rows;
  std::vector<int> labels;
  std::mt19937 rng(1);
  for (std::uint8_t code = 0; code < 20; ++code) {
    std::vector<std::uint8_t> r(5);
    for (int b = 0; b < 5; ++b) r[static_cast<std::size_t>(b)] = (code >> b) & 1;
    rows.push_back(r);
    labels.push_back(static_cast<int>(rng() % 2));
  }
  auto d = dataset(rows, labels);
  auto t = induce(d, {});
  for (std::size_t r = 0; r < d.rows; ++r) CHECK(t.predict(d.row(r)) == d.labels[r]);
}

TEST_CASE("dtree: leaf statistics") {
  auto d = random_dataset(300, 12, 9);
  for (auto weight : {ClassWeight::None, ClassWeight::Balanced}) {
    Hyperparameters hp;
    hp.class_weight = weight;
    hp.max_depth = 5;
    auto t = induce(d, hp);
    int total = 0;
    for (const auto& n : t.nodes) {
      const double p = static_cast<double>(n.pos) / n.samples();
      CHECK(n.impurity == doctest::Approx(1 - p * p - (1 - p) * (1 - p)).epsilon(1e-9));
      CHECK(n.impurity >= 0.0);
      CHECK(n.impurity <= 1.0);
      if (n.is_leaf()) total += n.samples();
      else {
        const auto& a = t.nodes[static_cast<std::size_t>(n.true_child)];
        const auto& b = t.nodes[static_cast<std::size_t>(n.false_child)];
        CHECK(a.pos + b.pos == n.pos);
        CHECK(a.neg + b.neg == n.neg);
      }
    }
    CHECK(total == 300);
  }
}

TEST_CASE("dtree: each row matches exactly the path of its leaf") {
  auto d = random_dataset(200, 10, 4);
  auto t = induce(d, {});
  auto paths = extract_paths(t);
  CHECK(paths.size() == t.leaf_count());
  for (std::size_t r = 0; r < d.rows; ++r) {
    std::size_t matches = 0;
    const DtPath* hit = nullptr;
    for (const auto& p : paths)
      if (walk_path(p, d.row(r))) {
        ++matches;
        hit = &p;
      }
    REQUIRE(matches == 1);
    CHECK(static_cast<std::size_t>(hit->node_ids.back()) == t.leaf_of(d.row(r)));
    CHECK(hit->polarity == t.predict(d.row(r)));
  }
}

TEST_CASE("dtree: truncated prediction equals direct induction") {
  auto d = random_dataset(250, 14, 21);
  for (auto crit : {Criterion::Gini, Criterion::Entropy})
    for (auto weight : {ClassWeight::None, ClassWeight::Balanced})
      for (int leaf : {1, 10}) {
        Hyperparameters base;
        base.criterion = crit;
        base.class_weight = weight;
        base.min_samples_leaf = leaf;
        const auto deep = induce(d, base);
        for (std::optional<int> depth : {std::optional<int>{1}, std::optional<int>{3}, std::optional<int>{}})
          for (MinSamplesSplit split : {MinSamplesSplit{false, 2}, MinSamplesSplit{true, 0.2}, MinSamplesSplit{false, 40}}) {
            Hyperparameters hp = base;
            hp.max_depth = depth;
            hp.min_samples_split = split;
            const auto direct = induce(d, hp);
            const auto min_split = std::max<std::size_t>(2, split.resolve(d.rows));
            for (std::size_t r = 0; r < d.rows; ++r)
              CHECK(deep.predict_truncated(d.row(r), depth, min_split) == direct.predict(d.row(r)));
          }
      }
}

TEST_CASE("dtree: min_samples_split resolution") {
  CHECK(MinSamplesSplit{true, 0.1}.resolve(625) == 63);
  CHECK(MinSamplesSplit{false, 2}.resolve(625) == 2);
  CHECK(HyperparameterGrid{}.size() == 2 * 5 * 2 * 4 * 3 * 3);
}

TEST_CASE("dtree: sepsis fixture paths") {
  auto t = testing::sepsis_tree();
  auto paths = extract_paths(t);
  CHECK(paths.size() == 5);
  CHECK(std::count_if(paths.begin(), paths.end(), [](const DtPath& p) { return p.polarity == 1; }) == 3);
  CHECK(t.leaf_count() == 5);
  CHECK(t.nodes[0].pos == 540);
  CHECK(t.nodes[0].samples() == 625);
}

TEST_CASE("dtree: JSON round trip") {
  auto d = random_dataset(120, 8, 2);
  Hyperparameters hp;
  hp.criterion = Criterion::Entropy;
  hp.max_depth = 4;
  hp.min_samples_split = {true, 0.1};
  auto t = induce(d, hp);
  auto back = DecisionTree::from_json(t.to_json());
  CHECK(back.to_json() == t.to_json());
  CHECK(back.hp == t.hp);
  for (std::size_t r = 0; r < d.rows; ++r) CHECK(back.predict(d.row(r)) == t.predict(d.row(r)));
  CHECK(Hyperparameters::from_json(hp.to_json()) == hp);
  CHECK(hp.to_json()["min_samples_split"].is_number_float());
  CHECK(Hyperparameters{}.to_json()["min_samples_split"].is_number_integer());
}

TEST_CASE("dtree: stratified folds") {
  std::vector<int> labels(53);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 4 == 0;
  auto f = stratified_folds(labels, 5, 42);
  CHECK(f == stratified_folds(labels, 5, 42));
  CHECK(f != stratified_folds(labels, 5, 43));
  for (int k = 0; k < 5; ++k) {
    int pos = 0, all = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (f[i] == k) ++all, pos += labels[i];
    // 14 positives and 39 negatives dealt round-robin after the shuffle.
    CHECK(pos == (k < 4 ? 3 : 2));
    CHECK(all == (k < 4 ? 11 : 9));
  }
}

TEST_CASE("dtree: f-score") {
  CHECK(f_score(std::vector<int>{1, 1, 0}, std::vector<int>{1, 1, 0}) == 1.0);
  CHECK(f_score(std::vector<int>{0, 0}, std::vector<int>{0, 0}) == 0.0);
  CHECK(f_score(std::vector<int>{1, 1, 1, 1, 0}, std::vector<int>{1, 1, 1, 0, 1}) == doctest::Approx(0.75));
}

TEST_CASE("dtree: grid search") {
  auto d = random_dataset(150, 8, 5);
  Hyperparameters hp;
  hp.max_depth = 2;
  auto one = grid_search_cv(d, HyperparameterGrid::single(hp));
  CHECK(one.best == hp);
  CHECK(one.scores.size() == 1);

  // Column 0 is the label: one split is perfect, and a leaf floor above the
  // fold size forbids it.
  std::vector<std::vector<std::uint8_t>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    rows.push_back({static_cast<std::uint8_t>(i % 2), static_cast<std::uint8_t>(i % 3 == 0)});
    labels.push_back(i % 2);
  }
  auto perfect = dataset(rows, labels);
  HyperparameterGrid grid = HyperparameterGrid::single(hp);
  grid.min_samples_leaf = {30, 1};
  grid.top_h = {TopH::Half};
  auto res = grid_search_cv(perfect, grid);
  CHECK(res.best.min_samples_leaf == 1);
  CHECK(res.best_score == 1.0);

  auto again = grid_search_cv(d, HyperparameterGrid::single(hp));
  CHECK(again.tree.to_json() == one.tree.to_json());
}
