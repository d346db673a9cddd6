#include "ppm/evaluator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "ppm/error.hpp"

namespace ppm {

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::TP: return "TP";
    case Outcome::FP: return "FP";
    case Outcome::TN: return "TN";
    case Outcome::FN: return "FN";
  }
  return "";
}

Outcome whatif_classify(double full_trace_fitness, int label, double th_fit) {
  if (full_trace_fitness >= th_fit) return label ? Outcome::TP : Outcome::FP;
  return label ? Outcome::FN : Outcome::TN;
}

Outcome whatif_classify(const Trace& full_trace, const DtPath& chosen_path, double th_fit) {
  if (!full_trace.label) throw Error(ErrorKind::MissingLabelAttribute, full_trace.case_id);
  return whatif_classify(fitness(full_trace.activities, chosen_path, true), *full_trace.label, th_fit);
}

void ConfusionMatrix::add(Outcome o) {
  switch (o) {
    case Outcome::TP: ++tp; break;
    case Outcome::FP: ++fp; break;
    case Outcome::TN: ++tn; break;
    case Outcome::FN: ++fn; break;
  }
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

Scores metrics(const ConfusionMatrix& cm) {
  auto ratio = [](double a, double b) { return b == 0 ? 0.0 : a / b; };
  Scores s;
  s.precision = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fp));
  s.recall = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fn));
  s.f_score = ratio(2 * s.precision * s.recall, s.precision + s.recall);
  return s;
}

void finalize(MetricsReport& report) {
  report.cumulative.clear();
  report.cumulative_scores.clear();
  ConfusionMatrix running;
  double sum = 0;
  for (const auto& [k, cm] : report.per_k) {
    running += cm;
    report.cumulative[k] = running;
    report.cumulative_scores[k] = metrics(running);
    sum += report.cumulative_scores[k].f_score;
  }
  report.average_f = report.per_k.empty() ? 0.0 : sum / static_cast<double>(report.per_k.size());
}

nlohmann::json MetricsReport::to_json() const {
  auto cm_json = [](const ConfusionMatrix& cm) {
    return nlohmann::json{{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
  };
  nlohmann::json ks = nlohmann::json::array();
  for (const auto& [k, cm] : per_k) {
    const auto& s = cumulative_scores.at(k);
    ks.push_back({{"k", k},
                  {"per_k", cm_json(cm)},
                  {"cumulative", cm_json(cumulative.at(k))},
                  {"precision", s.precision},
                  {"recall", s.recall},
                  {"f_score", s.f_score}});
  }
  return {{"average_f_score", average_f}, {"no_positive_path", no_positive_path}, {"prefix_lengths", ks}};
}

MetricsReport run_evaluation(const PrefixLog& prefixes, const DecisionTree& tree, const LambdaWeights& lambda,
                             const EvalConfig& cfg) {
  const Recommender rec(tree, lambda, cfg.min_path_samples);
  MetricsReport report;
  for (const auto& entry : prefixes.entries) {
    const Trace& full = prefixes.source_of(entry);
    double full_fitness = 0.0;
    const auto start = std::chrono::steady_clock::now();
    std::optional<RecommendationResult> result;
    try {
      result = rec.generate(entry.prefix.activities);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoPositivePath) throw;
    }
    const auto stop = std::chrono::steady_clock::now();
    report.timings_ms[entry.k].push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    if (result) full_fitness = fitness(full.activities, result->chosen_path, true);
    else ++report.no_positive_path;
    report.per_k[entry.k].add(whatif_classify(full_fitness, entry.label, cfg.th_fit));
  }
  finalize(report);
  return report;
}

TuningResult tune_thresholds(const PrefixLog& val_prefixes, const DecisionTree& tree,
                             std::span<const LambdaWeights> lambda_grid, std::span<const double> th_grid,
                             int min_path_samples) {
  if (val_prefixes.entries.empty()) throw Error(ErrorKind::InvalidArgument, "empty validation prefix log");
  if (lambda_grid.empty() || th_grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty tuning grid");
  std::vector<double> ths(th_grid.begin(), th_grid.end());
  std::sort(ths.begin(), ths.end());
  std::vector<LambdaWeights> lambdas(lambda_grid.begin(), lambda_grid.end());
  std::sort(lambdas.begin(), lambdas.end());

  // Fitness tables are independent of lambda: prefix fitness (ongoing) and
  // full-trace fitness (complete) for every positive path.
  const Recommender probe(tree, LambdaWeights{1, 0, 0}, min_path_samples);
  const auto& paths = probe.positive_paths();
  const std::size_t np = paths.size();
  const std::size_t n = val_prefixes.entries.size();
  std::vector<double> prefix_fit(n * np), full_fit(val_prefixes.sources.size() * np);
  for (std::size_t s = 0; s < val_prefixes.sources.size(); ++s)
    for (std::size_t p = 0; p < np; ++p) full_fit[s * np + p] = fitness(val_prefixes.sources[s].activities, paths[p], true);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < np; ++p)
      prefix_fit[i * np + p] = fitness(val_prefixes.entries[i].prefix.activities, paths[p], false);

  TuningResult best{lambdas.front(), ths.front(), -1.0};
  for (double th : ths) {
    for (const auto& lambda : lambdas) {
      const Recommender rec(tree, lambda, min_path_samples);
      MetricsReport report;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& e = val_prefixes.entries[i];
        double f = 0.0;
        if (np > 0) {
          const std::size_t p = rec.best_positive_path(std::span<const double>(prefix_fit.data() + i * np, np));
          f = full_fit[e.source_index * np + p];
        }
        report.per_k[e.k].add(whatif_classify(f, e.label, th));
      }
      finalize(report);
      if (report.average_f > best.average_f + 1e-12) best = {lambda, th, report.average_f};
    }
  }
  return best;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size()) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

void emit_report(const MetricsReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + (dir / name).string() + "'");
    return out;
  };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  {
    auto out = open("metrics.json");
    out << report.to_json().dump(2) << '\n';
  }
  {
    auto out = open("cumulative_fscore.csv");
    out << "k,f_score\n";
    for (const auto& [k, s] : report.cumulative_scores) out << k << ',' << fmt(s.f_score) << '\n';
  }
  {
    auto out = open("timings.csv");
    out << "k,mean_ms,p95_ms\n";
    for (const auto& [k, ts] : report.timings_ms) {
      const double mean = ts.empty() ? 0.0 : std::accumulate(ts.begin(), ts.end(), 0.0) / static_cast<double>(ts.size());
      out << k << ',' << fmt(mean) << ',' << fmt(quantile(ts, 0.95)) << '\n';
    }
  }
  {
    auto out = open("summary.txt");
    char line[160];
    out << "   k      TP      FP      TN      FN   prec.    rec.  F (cum.)\n";
    for (const auto& [k, cm] : report.cumulative) {
      const auto& s = report.cumulative_scores.at(k);
      std::snprintf(line, sizeof line, "%4zu %7zu %7zu %7zu %7zu %7.2f %7.2f %9.2f\n", k, cm.tp, cm.fp, cm.tn, cm.fn,
                    100 * s.precision, 100 * s.recall, 100 * s.f_score);
      out << line;
    }
    std::snprintf(line, sizeof line, "average F-score over prefix lengths: %.2f\n", 100 * report.average_f);
    out << line;
    std::snprintf(line, sizeof line, "prefixes without a positive path: %zu\n", report.no_positive_path);
    out << line;
  }
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return 0.0;
  const auto rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace ppm
