#include "ppm/model.hpp"

#include <fstream>

#include "ppm/error.hpp"

namespace ppm {

std::set<Family> families_from_option(std::string_view option) {
  if (option == "A") return {Family::E, Family::C, Family::PR, Family::NR};
  auto f = family_from_name(option);
  if (!f) throw Error(ErrorKind::InvalidArgument, "families must be one of E, C, PR, NR, A");
  return {Family::E, *f};
}

std::string families_option(const std::set<Family>& families) {
  if (families.size() == 4) return "A";
  for (Family f : families)
    if (f != Family::E) return std::string(family_name(f));
  return "E";
}

nlohmann::json ModelBundle::to_json() const {
  nlohmann::json fams = nlohmann::json::array();
  for (Family f : families) fams.push_back(family_name(f));
  return {{"format", "ppm-model/1"},
          {"dataset", dataset_name},
          {"trained_at", trained_at},
          {"families", fams},
          {"alphabet", alphabet},
          {"label", label.to_json()},
          {"split", {split.train_fraction, split.val_fraction, split.test_fraction}},
          {"prefix_cap", prefix_cap},
          {"lambda", lambda.to_json()},
          {"th_fit", th_fit},
          {"min_path_samples", min_path_samples},
          {"cv_f_score", cv_f_score},
          {"tree", tree.to_json()}};
}

ModelBundle ModelBundle::from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "ppm-model/1")
    throw Error(ErrorKind::InvalidArgument, "not a ppm model file");
  ModelBundle m;
  m.dataset_name = j.value("dataset", std::string());
  m.trained_at = j.value("trained_at", std::string());
  for (const auto& f : j.at("families")) {
    auto fam = family_from_name(f.get<std::string>());
    if (!fam) throw Error(ErrorKind::InvalidArgument, "unknown family " + f.dump());
    m.families.insert(*fam);
  }
  m.alphabet = j.at("alphabet").get<std::set<std::string>>();
  m.label = LabelSpec::from_json(j.at("label"));
  const auto& s = j.at("split");
  m.split = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
  m.prefix_cap = j.at("prefix_cap").get<std::size_t>();
  m.lambda = LambdaWeights::from_json(j.at("lambda"));
  m.th_fit = j.at("th_fit").get<double>();
  m.min_path_samples = j.value("min_path_samples", 3);
  m.cv_f_score = j.value("cv_f_score", 0.0);
  m.tree = DecisionTree::from_json(j.at("tree"));
  return m;
}

void ModelBundle::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  out << to_json().dump(2) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path.string() + "'");
}

ModelBundle ModelBundle::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, "'" + path.string() + "': " + e.what());
  }
  return from_json(j);
}

namespace {

std::size_t resolve_cap(const std::string& dataset, const EventLog& prepared, std::optional<std::size_t> override_cap) {
  if (override_cap) return *override_cap;
  const auto lengths = case_lengths(prepared);
  return prefix_cap_for(dataset, lengths);
}

}  // namespace

ModelBundle train_model(const EventLog& raw_log, const TrainConfig& cfg) {
  const EventLog log = prepare_log(raw_log, cfg.label);
  const SplitLogs parts = chronological_split(log, cfg.split);

  ConstraintUniverse universe = build_universe(parts.train.alphabet, cfg.families, cfg.existence_ns);
  universe = apriori_filter(universe, parts.train, cfg.apriori_support);
  const EncodedDataset train = encode(parts.train, universe, true);
  GridSearchResult search = grid_search_cv(train, cfg.grid, cfg.folds, cfg.seed);

  ModelBundle m;
  m.tree = std::move(search.tree);
  m.cv_f_score = search.best_score;
  m.dataset_name = cfg.dataset_name;
  m.alphabet = parts.train.alphabet;
  m.families = cfg.families;
  m.label = cfg.label;
  m.split = cfg.split;
  m.min_path_samples = cfg.eval.min_path_samples;
  m.prefix_cap = resolve_cap(cfg.dataset_name, log, cfg.prefix_cap);
  m.lambda = LambdaWeights{};
  m.th_fit = cfg.eval.th_fit;

  Timestamp latest{};
  for (const auto& t : parts.train.traces)
    for (const auto& e : t.events) latest = std::max(latest, e.timestamp);
  m.trained_at = format_timestamp(latest);

  if (cfg.tune) {
    const PrefixLog val = make_prefix_log(parts.val, m.prefix_cap);
    if (val.entries.empty()) {
      warn("validation log yields no prefixes; keeping default lambda and th_fit");
    } else {
      const auto lambdas = lambda_grid();
      const TuningResult tuned = tune_thresholds(val, m.tree, lambdas, cfg.eval.th_fit_grid, m.min_path_samples);
      m.lambda = tuned.lambda;
      m.th_fit = tuned.th_fit;
    }
  }
  return m;
}

MetricsReport evaluate_model(const ModelBundle& model, const EventLog& raw_log) {
  const EventLog log = prepare_log(raw_log, model.label);
  const SplitLogs parts = chronological_split(log, model.split);
  const PrefixLog test = make_prefix_log(parts.test, model.prefix_cap);
  EvalConfig cfg;
  cfg.th_fit = model.th_fit;
  cfg.min_path_samples = model.min_path_samples;
  return run_evaluation(test, model.tree, model.lambda, cfg);
}

}  // namespace ppm
