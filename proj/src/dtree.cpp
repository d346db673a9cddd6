#include "ppm/dtree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "ppm/error.hpp"

namespace ppm {

// ---------------------------------------------------------------------------
// Hyperparameters

std::size_t MinSamplesSplit::resolve(std::size_t n_rows) const {
  if (fraction) return static_cast<std::size_t>(std::ceil(value * static_cast<double>(n_rows) - 1e-9));
  return static_cast<std::size_t>(value);
}

namespace {

std::string_view criterion_name(Criterion c) { return c == Criterion::Gini ? "gini" : "entropy"; }
std::string_view weight_name(ClassWeight w) { return w == ClassWeight::None ? "none" : "balanced"; }

}  // namespace

nlohmann::json Hyperparameters::to_json() const {
  nlohmann::json j;
  j["criterion"] = criterion_name(criterion);
  j["max_depth"] = max_depth ? nlohmann::json(*max_depth) : nlohmann::json(nullptr);
  j["class_weight"] = weight_name(class_weight);
  if (min_samples_split.fraction) j["min_samples_split"] = min_samples_split.value;
  else j["min_samples_split"] = static_cast<std::int64_t>(min_samples_split.value);
  j["min_samples_leaf"] = min_samples_leaf;
  j["top_h"] = top_h_name(top_h);
  return j;
}

Hyperparameters Hyperparameters::from_json(const nlohmann::json& j) {
  Hyperparameters hp;
  const auto crit = j.value("criterion", std::string("gini"));
  if (crit == "gini") hp.criterion = Criterion::Gini;
  else if (crit == "entropy") hp.criterion = Criterion::Entropy;
  else throw Error(ErrorKind::InvalidArgument, "unknown criterion '" + crit + "'");
  if (j.contains("max_depth") && !j.at("max_depth").is_null()) hp.max_depth = j.at("max_depth").get<int>();
  const auto cw = j.value("class_weight", std::string("none"));
  if (cw == "none") hp.class_weight = ClassWeight::None;
  else if (cw == "balanced") hp.class_weight = ClassWeight::Balanced;
  else throw Error(ErrorKind::InvalidArgument, "unknown class_weight '" + cw + "'");
  if (j.contains("min_samples_split")) {
    const auto& m = j.at("min_samples_split");
    if (m.is_number_integer()) hp.min_samples_split = {false, static_cast<double>(m.get<std::int64_t>())};
    else hp.min_samples_split = {true, m.get<double>()};
  }
  hp.min_samples_leaf = j.value("min_samples_leaf", 1);
  auto th = top_h_from_name(j.value("top_h", std::string("50%")));
  if (!th) throw Error(ErrorKind::InvalidArgument, "unknown top_h " + j.at("top_h").dump());
  hp.top_h = *th;
  return hp;
}

std::string Hyperparameters::to_string() const { return to_json().dump(); }

std::size_t HyperparameterGrid::size() const {
  return criterion.size() * max_depth.size() * class_weight.size() * min_samples_split.size() *
         min_samples_leaf.size() * top_h.size();
}

std::vector<Hyperparameters> HyperparameterGrid::points() const {
  std::vector<Hyperparameters> out;
  out.reserve(size());
  for (auto c : criterion)
    for (auto d : max_depth)
      for (auto w : class_weight)
        for (auto s : min_samples_split)
          for (auto l : min_samples_leaf)
            for (auto h : top_h) out.push_back(Hyperparameters{c, d, w, s, l, h});
  return out;
}

HyperparameterGrid HyperparameterGrid::single(const Hyperparameters& hp) {
  return HyperparameterGrid{{hp.criterion}, {hp.max_depth},        {hp.class_weight},
                            {hp.min_samples_split}, {hp.min_samples_leaf}, {hp.top_h}};
}

// ---------------------------------------------------------------------------
// Induction

namespace {

using Bits = std::vector<std::uint64_t>;

std::size_t popcount_and(const Bits& a, const Bits& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
  return n;
}

std::size_t popcount_and3(const Bits& a, const Bits& b, const Bits& c) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += static_cast<std::size_t>(std::popcount(a[i] & b[i] & c[i]));
  return n;
}

double impurity(Criterion crit, double wp, double wn) {
  const double total = wp + wn;
  if (total <= 0) return 0.0;
  const double p = wp / total, q = wn / total;
  if (crit == Criterion::Gini) return 1.0 - p * p - q * q;
  double h = 0;
  if (p > 0) h -= p * std::log2(p);
  if (q > 0) h -= q * std::log2(q);
  return h;
}

class Builder {
public:
  Builder(const EncodedDataset& data, const Hyperparameters& hp, std::optional<int> max_depth,
          std::size_t min_split)
      : hp_(hp), max_depth_(max_depth), min_split_(min_split) {
    const std::size_t words = (data.rows + 63) / 64;
    features_.assign(data.cols, Bits(words, 0));
    positive_.assign(words, 0);
    std::size_t npos = 0;
    for (std::size_t r = 0; r < data.rows; ++r) {
      const std::uint64_t bit = std::uint64_t{1} << (r % 64);
      if (data.labels[r]) {
        positive_[r / 64] |= bit;
        ++npos;
      }
      for (std::size_t c = 0; c < data.cols; ++c)
        if (data.at(r, c) == code(RVState::Satisfied)) features_[c][r / 64] |= bit;
    }
    const std::size_t nneg = data.rows - npos;
    if (hp.class_weight == ClassWeight::Balanced && npos > 0 && nneg > 0) {
      w_pos_ = static_cast<double>(data.rows) / (2.0 * static_cast<double>(npos));
      w_neg_ = static_cast<double>(data.rows) / (2.0 * static_cast<double>(nneg));
    }
    total_weight_ = w_pos_ * static_cast<double>(npos) + w_neg_ * static_cast<double>(nneg);
    all_.assign(words, 0);
    for (std::size_t r = 0; r < data.rows; ++r) all_[r / 64] |= std::uint64_t{1} << (r % 64);
  }

  std::vector<TreeNode> run() {
    build(all_, 0);
    return std::move(nodes_);
  }

private:
  int build(const Bits& mask, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const std::size_t n = popcount_and(mask, mask);
    const std::size_t pos = popcount_and(mask, positive_);
    const std::size_t neg = n - pos;
    {
      TreeNode& node = nodes_.back();
      node.depth = depth;
      node.pos = static_cast<int>(pos);
      node.neg = static_cast<int>(neg);
      node.impurity = impurity(hp_.criterion, static_cast<double>(pos), static_cast<double>(neg));
      node.polarity = w_pos_ * static_cast<double>(pos) > w_neg_ * static_cast<double>(neg) ? 1 : 0;
    }
    if (pos == 0 || neg == 0) return id;
    if (max_depth_ && depth >= *max_depth_) return id;
    if (n < min_split_) return id;
    const auto leaf = static_cast<std::size_t>(std::max(1, hp_.min_samples_leaf));
    if (n < 2 * leaf) return id;

    const double wp = w_pos_ * static_cast<double>(pos), wn = w_neg_ * static_cast<double>(neg);
    const double parent = (wp + wn) * impurity(hp_.criterion, wp, wn);
    // Impure nodes split even at zero gain, as CART does; near-ties keep the lowest column.
    double best_gain = -std::numeric_limits<double>::infinity();
    int best = -1;
    for (std::size_t c = 0; c < features_.size(); ++c) {
      const std::size_t tn = popcount_and(mask, features_[c]);
      const std::size_t fn = n - tn;
      if (tn < leaf || fn < leaf) continue;
      const std::size_t tp = popcount_and3(mask, features_[c], positive_);
      const double twp = w_pos_ * static_cast<double>(tp);
      const double twn = w_neg_ * static_cast<double>(tn - tp);
      const double fwp = wp - twp, fwn = wn - twn;
      const double child = (twp + twn) * impurity(hp_.criterion, twp, twn) +
                           (fwp + fwn) * impurity(hp_.criterion, fwp, fwn);
      const double gain = (parent - child) / total_weight_;
      if (gain > best_gain + 1e-12) {
        best_gain = gain;
        best = static_cast<int>(c);
      }
    }
    if (best < 0) return id;

    Bits t(mask.size()), f(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) {
      t[i] = mask[i] & features_[static_cast<std::size_t>(best)][i];
      f[i] = mask[i] & ~features_[static_cast<std::size_t>(best)][i];
    }
    nodes_[static_cast<std::size_t>(id)].feature = best;
    const int tc = build(t, depth + 1);
    nodes_[static_cast<std::size_t>(id)].true_child = tc;
    const int fc = build(f, depth + 1);
    nodes_[static_cast<std::size_t>(id)].false_child = fc;
    return id;
  }

  const Hyperparameters& hp_;
  std::optional<int> max_depth_;
  std::size_t min_split_;
  std::vector<Bits> features_;
  Bits positive_, all_;
  double w_pos_ = 1.0, w_neg_ = 1.0, total_weight_ = 1.0;
  std::vector<TreeNode> nodes_;
};

DecisionTree induce_bounded(const EncodedDataset& data, const Hyperparameters& hp, std::optional<int> max_depth,
                            std::size_t min_split) {
  DecisionTree tree;
  tree.universe = data.universe;
  tree.hp = hp;
  if (data.rows == 0) throw Error(ErrorKind::InvalidArgument, "cannot induce a tree from zero rows");
  tree.nodes = Builder(data, hp, max_depth, min_split).run();
  return tree;
}

}  // namespace

DecisionTree induce(const EncodedDataset& data, const Hyperparameters& hp) {
  const std::size_t npos = static_cast<std::size_t>(std::count(data.labels.begin(), data.labels.end(), 1));
  if (data.rows > 0 && (npos == 0 || npos == data.rows)) warn("training data holds a single class; tree is one leaf");
  return induce_bounded(data, hp, hp.max_depth, hp.min_samples_split.resolve(data.rows));
}

std::size_t DecisionTree::leaf_of(std::span<const std::uint8_t> row) const {
  if (row.size() != universe.size())
    throw Error(ErrorKind::WidthMismatch,
                "row has " + std::to_string(row.size()) + " columns, tree expects " + std::to_string(universe.size()));
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] == code(RVState::Satisfied) ? n.true_child
                                                                                                  : n.false_child);
  }
  return i;
}

int DecisionTree::predict(std::span<const std::uint8_t> row) const { return nodes[leaf_of(row)].polarity; }

int DecisionTree::predict_truncated(std::span<const std::uint8_t> row, std::optional<int> max_depth,
                                    std::size_t min_split_count) const {
  if (row.size() != universe.size()) throw Error(ErrorKind::WidthMismatch, "row width differs from tree");
  std::size_t i = 0;
  for (;;) {
    const auto& n = nodes[i];
    if (n.is_leaf() || (max_depth && n.depth >= *max_depth) ||
        static_cast<std::size_t>(n.samples()) < min_split_count)
      return n.polarity;
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] == code(RVState::Satisfied) ? n.true_child
                                                                                                  : n.false_child);
  }
}

int DecisionTree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json ns = nlohmann::json::array();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    nlohmann::json j{{"id", i},           {"depth", n.depth},         {"pos", n.pos},
                     {"neg", n.neg},      {"impurity", n.impurity},   {"polarity", n.polarity}};
    if (!n.is_leaf()) {
      j["feature"] = n.feature;
      j["constraint"] = universe[static_cast<std::size_t>(n.feature)].to_string();
      j["true"] = n.true_child;
      j["false"] = n.false_child;
    }
    ns.push_back(std::move(j));
  }
  return {{"hyperparameters", hp.to_json()}, {"universe", universe.to_json()}, {"nodes", ns}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  DecisionTree t;
  t.hp = Hyperparameters::from_json(j.at("hyperparameters"));
  t.universe = ConstraintUniverse::from_json(j.at("universe"));
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.depth = n.at("depth").get<int>();
    node.pos = n.at("pos").get<int>();
    node.neg = n.at("neg").get<int>();
    node.impurity = n.at("impurity").get<double>();
    node.polarity = n.at("polarity").get<int>();
    if (n.contains("feature")) {
      node.feature = n.at("feature").get<int>();
      node.true_child = n.at("true").get<int>();
      node.false_child = n.at("false").get<int>();
    }
    t.nodes.push_back(node);
  }
  const int count = static_cast<int>(t.nodes.size());
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "tree has no nodes");
  for (const auto& n : t.nodes) {
    if (n.is_leaf()) continue;
    if (n.feature >= static_cast<int>(t.universe.size()) || n.true_child <= 0 || n.true_child >= count ||
        n.false_child <= 0 || n.false_child >= count)
      throw Error(ErrorKind::InvalidArgument, "tree node references out of range");
  }
  return t;
}

// ---------------------------------------------------------------------------
// Paths

std::string DtPath::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < node_ids.size(); ++i) out << (i ? " -> " : "") << "node#" << node_ids[i];
  return out.str();
}

std::vector<DtPath> extract_paths(const DecisionTree& tree) {
  std::vector<DtPath> out;
  DtPath current;
  auto walk = [&](auto& self, int id) -> void {
    const auto& n = tree.nodes[static_cast<std::size_t>(id)];
    current.node_ids.push_back(id);
    if (n.is_leaf()) {
      DtPath p = current;
      p.polarity = n.polarity;
      p.impurity = n.impurity;
      p.pos = n.pos;
      p.neg = n.neg;
      out.push_back(std::move(p));
    } else {
      const auto col = static_cast<std::size_t>(n.feature);
      current.steps.push_back({col, tree.universe[col], true});
      self(self, n.true_child);
      current.steps.back().satisfied = false;
      self(self, n.false_child);
      current.steps.pop_back();
    }
    current.node_ids.pop_back();
  };
  walk(walk, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validated grid search

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 folds");
  std::mt19937_64 rng(seed);
  std::vector<int> out(labels.size(), 0);
  for (int cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if ((labels[i] ? 1 : 0) == cls) idx.push_back(i);
    // Hand-rolled Fisher-Yates: std::shuffle is not specified identically across libraries.
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng() % i]);
    for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] = static_cast<int>(j % static_cast<std::size_t>(folds));
  }
  return out;
}

double f_score(std::span<const int> truth, std::span<const int> predicted) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] && truth[i]) ++tp;
    else if (predicted[i]) ++fp;
    else if (truth[i]) ++fn;
  }
  if (tp == 0) return 0.0;
  const double prec = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double rec = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2 * prec * rec / (prec + rec);
}

GridSearchResult grid_search_cv(const EncodedDataset& train, const HyperparameterGrid& grid, int folds,
                                std::uint64_t seed) {
  if (train.rows == 0) throw Error(ErrorKind::InvalidArgument, "empty training set");
  const auto points = grid.points();
  if (points.empty()) throw Error(ErrorKind::InvalidArgument, "empty hyperparameter grid");

  const auto npos = static_cast<std::size_t>(std::count(train.labels.begin(), train.labels.end(), 1));
  const std::size_t minority = std::min(npos, train.rows - npos);
  int k = folds;
  if (minority < static_cast<std::size_t>(folds)) {
    k = static_cast<int>(minority);
    warn("minority class has " + std::to_string(minority) + " rows; using " + std::to_string(std::max(k, 0)) +
         " folds");
  }

  std::vector<double> sum(points.size(), 0.0);
  if (k >= 2) {
    const auto assignment = stratified_folds(train.labels, k, seed);
    for (int fold = 0; fold < k; ++fold) {
      std::vector<std::size_t> fit_rows, test_rows;
      for (std::size_t r = 0; r < train.rows; ++r) (assignment[r] == fold ? test_rows : fit_rows).push_back(r);
      const EncodedDataset fit_all = train.select_rows(fit_rows);
      const EncodedDataset test_all = train.select_rows(test_rows);
      const auto mi_order = mutual_info_order(fit_all);

      // One unbounded tree per (top_h, criterion, weight, leaf); depth and split
      // bounds are applied by truncated prediction.
      std::map<std::tuple<TopH, Criterion, ClassWeight, int>, std::pair<DecisionTree, EncodedDataset>> cache;
      for (std::size_t p = 0; p < points.size(); ++p) {
        const auto& hp = points[p];
        const auto key = std::make_tuple(hp.top_h, hp.criterion, hp.class_weight, hp.min_samples_leaf);
        auto it = cache.find(key);
        if (it == cache.end()) {
          auto cols = std::vector<std::size_t>(mi_order.begin(),
                                               mi_order.begin() + static_cast<std::ptrdiff_t>(
                                                                      top_h_count(hp.top_h, mi_order.size())));
          std::sort(cols.begin(), cols.end());
          ConstraintUniverse sub;
          sub.families = train.universe.families;
          sub.alphabet = train.universe.alphabet;
          for (auto c : cols) sub.constraints.push_back(train.universe[c]);
          Hyperparameters base = hp;
          base.max_depth.reset();
          base.min_samples_split = {false, 2};
          DecisionTree tree = induce_bounded(fit_all.select_columns(sub), base, std::nullopt, 2);
          it = cache.emplace(key, std::make_pair(std::move(tree), test_all.select_columns(sub))).first;
        }
        const auto& [tree, test] = it->second;
        const std::size_t min_split = std::max<std::size_t>(2, hp.min_samples_split.resolve(fit_rows.size()));
        std::vector<int> pred(test.rows);
        for (std::size_t r = 0; r < test.rows; ++r) pred[r] = tree.predict_truncated(test.row(r), hp.max_depth, min_split);
        sum[p] += f_score(test.labels, pred);
      }
    }
  }

  GridSearchResult result;
  std::size_t best = 0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double mean = k >= 2 ? sum[p] / k : 0.0;
    result.scores.push_back({points[p], mean});
    if (mean > result.scores[best].mean_f) best = p;
  }
  result.best = points[best];
  result.best_score = result.scores[best].mean_f;
  const ConstraintUniverse selected = mutual_info_rank(train, result.best.top_h);
  result.tree = induce(train.select_columns(selected), result.best);
  return result;
}

}  // namespace ppm
