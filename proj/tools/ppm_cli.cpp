// ppm: train, evaluate and serve prescriptive process monitoring models.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppm/error.hpp"
#include "ppm/model.hpp"
#include "ppm/service.hpp"

namespace {

constexpr int kExitValidation = 2;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ppm::Error(ppm::ErrorKind::IoError, "cannot open '" + path + "'");
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ppm::Error(ppm::ErrorKind::InvalidArgument, "'" + path + "' is not valid JSON");
  return j;
}

// "--label" accepts inline JSON, a JSON file, "violation:<LTLf>",
// "satisfaction:<LTLf>" or a bare trace attribute name.
ppm::LabelSpec parse_label(const std::string& text) {
  ppm::LabelSpec spec;
  if (!text.empty() && text.front() == '{') {
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ppm::Error(ppm::ErrorKind::InvalidArgument, "--label is not valid JSON");
    spec = ppm::LabelSpec::from_json(j);
  } else if (text.ends_with(".json") && std::filesystem::exists(text)) {
    spec = ppm::LabelSpec::from_json(read_json_file(text));
  } else if (text.starts_with("violation:")) {
    spec.kind = ppm::LabelKind::LtlfViolation;
    spec.formula = text.substr(10);
  } else if (text.starts_with("satisfaction:")) {
    spec.kind = ppm::LabelKind::LtlfSatisfaction;
    spec.formula = text.substr(13);
  } else {
    spec.kind = ppm::LabelKind::Attribute;
    spec.attribute_name = text;
  }
  spec.validate();
  return spec;
}

std::vector<std::string> split_prefix(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

// Flags from the --config file are appended unless already given on the
// command line, so explicit flags win. Values for a subcommand live under
// its name; top-level scalars apply to whichever subcommand runs and
// accepts them.
std::vector<std::string> merge_config(std::vector<std::string> args, const CLI::App& app) {
  std::string config_path;
  std::string subcommand;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].starts_with("--config=")) config_path = args[i].substr(9);
    if (subcommand.empty() && !args[i].starts_with("-") && (i == 1 || args[i - 1] != "--config"))
      subcommand = args[i];
  }
  if (config_path.empty()) return args;
  const auto j = read_json_file(config_path);
  if (!j.is_object()) throw ppm::Error(ppm::ErrorKind::InvalidArgument, "config must be a JSON object");

  auto given = [&](const std::string& flag) {
    for (const auto& a : args)
      if (a == flag || a.starts_with(flag + "=")) return true;
    return false;
  };
  const CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(subcommand);
  } catch (const CLI::OptionNotFound&) {
    return args;  // CLI11 reports the bad subcommand
  }
  auto add = [&](const std::string& key, const nlohmann::json& v) {
    const std::string flag = "--" + key;
    if (given(flag) || !sub->get_option_no_throw(flag)) return;
    if (v.is_boolean()) {
      if (v.get<bool>()) args.push_back(flag);
    } else if (v.is_string()) {
      args.push_back(flag + "=" + v.get<std::string>());
    } else if (v.is_array() && key == "prefix") {
      std::string joined;
      for (const auto& a : v) joined += (joined.empty() ? "" : ",") + a.get<std::string>();
      args.push_back(flag + "=" + joined);
    } else {
      args.push_back(flag + "=" + v.dump());  // objects (label), numbers, lambda arrays
    }
  };
  for (const auto& [key, v] : j.items())
    if (!v.is_object() || key == "label") add(key, v);
  if (j.contains(subcommand) && j.at(subcommand).is_object())
    for (const auto& [key, v] : j.at(subcommand).items()) add(key, v);
  return args;
}

int run_train(const std::string& log_path, const std::string& label, const std::string& families,
              const std::string& out, std::string dataset, std::uint64_t seed, double support,
              std::optional<std::size_t> prefix_cap, bool no_tune) {
  ppm::TrainConfig cfg;
  cfg.label = parse_label(label);
  cfg.families = ppm::families_from_option(families);
  cfg.seed = seed;
  cfg.apriori_support = support;
  cfg.prefix_cap = prefix_cap;
  cfg.tune = !no_tune;
  cfg.dataset_name = dataset.empty() ? std::filesystem::path(log_path).stem().string() : std::move(dataset);
  const auto log = ppm::load_log(log_path);
  const auto model = ppm::train_model(log, cfg);
  model.save(out);
  std::cerr << "model: " << model.universe().size() << " constraints, depth " << model.tree.depth() << ", "
            << model.tree.leaf_count() << " leaves, cv F " << model.cv_f_score << " -> " << out << '\n';
  return 0;
}

int run_evaluate(const std::string& model_path, const std::string& log_path, const std::string& report_dir) {
  const auto model = ppm::ModelBundle::load(model_path);
  const auto report = ppm::evaluate_model(model, ppm::load_log(log_path));
  ppm::emit_report(report, report_dir);
  std::cout << "average F-score: " << report.average_f << '\n';
  return 0;
}

int run_recommend(const std::string& model_path, const std::string& prefix) {
  const auto model = ppm::ModelBundle::load(model_path);
  const auto acts = split_prefix(prefix);
  if (acts.empty()) throw ppm::Error(ppm::ErrorKind::InvalidArgument, "empty prefix");
  for (const auto& a : acts)
    if (!model.alphabet.count(a)) ppm::warn("unknown activity '" + a + "' (never matches)");
  const ppm::Recommender rec(model.tree, model.lambda, model.min_path_samples);
  std::cout << rec.generate(acts).to_json().dump(2) << '\n';
  return 0;
}

int run_serve(const std::string& model_path, const std::string& host, int port, const std::string& snapshot) {
  ppm::Service service(ppm::ModelBundle::load(model_path));
  if (!snapshot.empty()) service.set_snapshot_path(snapshot);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    while (!done && !g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    service.stop();
  });
  std::cerr << "listening on " << host << ':' << port << '\n';
  const bool ok = service.serve(host, port);
  done = true;
  watcher.join();
  service.save_sessions();
  if (!ok && !g_stop) {
    std::cerr << "error: cannot listen on " << host << ':' << port << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prescriptive process monitoring from declarative constraints"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config;
  app.add_option("--config", config, "JSON file supplying any flag");

  std::string log_path, label, families = "E", out = "model.json", dataset, model_path, report_dir = "report",
                                   prefix, host = "0.0.0.0", snapshot;
  std::uint64_t seed = 42;
  double support = 0.05;
  std::optional<std::size_t> prefix_cap;
  bool no_tune = false;
  int port = 8080;

  auto* train = app.add_subcommand("train", "fit a model on a labelled log");
  train->add_option("--log", log_path, "CSV or XES event log")->required();
  train->add_option("--label", label, "label spec: JSON, JSON file, violation:<LTLf>, satisfaction:<LTLf> or attribute")
      ->required();
  train->add_option("--families", families, "constraint families")
      ->check(CLI::IsMember({"E", "C", "PR", "NR", "A"}))
      ->capture_default_str();
  train->add_option("--out", out, "model file")->capture_default_str();
  train->add_option("--dataset", dataset, "dataset name (defaults to the log file stem)");
  train->add_option("--seed", seed, "cross-validation seed")->capture_default_str();
  train->add_option("--support", support, "Apriori trace support")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  train->add_option("--prefix-cap", prefix_cap, "maximum prefix length")->check(CLI::PositiveNumber);
  train->add_flag("--no-tune", no_tune, "skip lambda and th_fit tuning");

  auto* evaluate = app.add_subcommand("evaluate", "score a model on the test split of a log");
  evaluate->add_option("--model", model_path, "model file")->required();
  evaluate->add_option("--log", log_path, "CSV or XES event log")->required();
  evaluate->add_option("--report", report_dir, "output directory")->capture_default_str();

  auto* recommend = app.add_subcommand("recommend", "recommendations for one prefix");
  recommend->add_option("--model", model_path, "model file")->required();
  recommend->add_option("--prefix", prefix, "comma separated activities")->required();

  auto* serve = app.add_subcommand("serve", "HTTP service");
  serve->add_option("--model", model_path, "model file")->required();
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535))->capture_default_str();
  serve->add_option("--host", host, "bind address")->capture_default_str();
  serve->add_option("--snapshot", snapshot, "write sessions here on shutdown");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = merge_config(std::move(args), app);
    std::vector<char*> cargs;
    for (auto& a : args) cargs.push_back(a.data());
    app.parse(static_cast<int>(cargs.size()), cargs.data());

    if (*train) return run_train(log_path, label, families, out, dataset, seed, support, prefix_cap, no_tune);
    if (*evaluate) return run_evaluate(model_path, log_path, report_dir);
    if (*recommend) return run_recommend(model_path, prefix);
    if (*serve) return run_serve(model_path, host, port, snapshot);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  } catch (const ppm::Error& e) {
    std::cerr << "error [" << ppm::to_string(e.kind()) << "]: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
