#include "ppm/logio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "ppm/error.hpp"
#include "ppm/ltlf.hpp"

namespace ppm {

Trace Trace::prefix(std::size_t k) const {
  Trace t;
  t.case_id = case_id;
  t.label = label;
  t.attributes = attributes;
  k = std::min(k, activities.size());
  t.activities.assign(activities.begin(), activities.begin() + static_cast<std::ptrdiff_t>(k));
  if (events.size() >= k) t.events.assign(events.begin(), events.begin() + static_cast<std::ptrdiff_t>(k));
  return t;
}

void Trace::push_back(Event e) {
  if (e.case_id.empty()) e.case_id = case_id;
  activities.push_back(e.activity);
  events.push_back(std::move(e));
}

Trace Trace::from_activities(std::string case_id, std::span<const std::string> activities) {
  Trace t;
  t.case_id = std::move(case_id);
  Timestamp ts{};
  for (const auto& a : activities) {
    t.push_back(Event{a, t.case_id, ts, {}});
    ts += std::chrono::seconds(1);
  }
  return t;
}

Trace Trace::from_activities(std::string case_id, std::initializer_list<std::string> activities) {
  return from_activities(std::move(case_id), std::span<const std::string>(activities.begin(), activities.size()));
}

void EventLog::recompute_alphabet() {
  alphabet.clear();
  for (const auto& t : traces) alphabet.insert(t.activities.begin(), t.activities.end());
}

std::vector<std::string> validate(const EventLog& log) {
  std::vector<std::string> issues;
  std::unordered_set<std::string> seen;
  std::set<std::string> alphabet;
  for (const auto& t : log.traces) {
    if (!seen.insert(t.case_id).second) issues.push_back("duplicate case id '" + t.case_id + "'");
    if (t.empty()) issues.push_back("trace '" + t.case_id + "' has no events");
    if (t.events.size() != t.activities.size()) {
      issues.push_back("trace '" + t.case_id + "' has mismatched events and activities");
      continue;
    }
    for (std::size_t i = 0; i < t.events.size(); ++i) {
      const auto& e = t.events[i];
      if (e.activity != t.activities[i])
        issues.push_back("trace '" + t.case_id + "' event " + std::to_string(i) + " activity mismatch");
      if (e.activity.empty()) issues.push_back("trace '" + t.case_id + "' event " + std::to_string(i) + " has empty activity");
      if (i > 0 && e.timestamp < t.events[i - 1].timestamp)
        issues.push_back("trace '" + t.case_id + "' events not sorted at " + std::to_string(i));
    }
    alphabet.insert(t.activities.begin(), t.activities.end());
  }
  if (alphabet != log.alphabet) issues.push_back("alphabet differs from the activities in the traces");
  return issues;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

char sniff_delimiter(const std::string& header) {
  std::size_t commas = 0, semis = 0, tabs = 0;
  bool quoted = false;
  for (char c : header) {
    if (c == '"') quoted = !quoted;
    if (quoted) continue;
    commas += c == ',';
    semis += c == ';';
    tabs += c == '\t';
  }
  if (semis > commas && semis >= tabs) return ';';
  if (tabs > commas && tabs > semis) return '\t';
  return ',';
}

// Reads one record; quoted fields may contain delimiters, doubled quotes, and newlines.
bool read_record(std::istream& in, char delim, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool quoted = false, any = false, was_quoted = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",;\"\n\r\t") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::optional<int> binary_label(const std::string& value) {
  if (value == "1" || value == "true" || value == "True" || value == "TRUE") return 1;
  if (value == "0" || value == "false" || value == "False" || value == "FALSE") return 0;
  return std::nullopt;
}

}  // namespace

EventLog parse_csv(std::istream& in, const ColumnMap& columns) {
  std::string header_line;
  if (!std::getline(in, header_line)) throw Error(ErrorKind::EmptyLog, "CSV has no header row");
  if (header_line.size() >= 3 && header_line.compare(0, 3, "\xEF\xBB\xBF") == 0) header_line.erase(0, 3);
  const char delim = columns.delimiter ? columns.delimiter : sniff_delimiter(header_line);

  std::vector<std::string> header;
  {
    std::istringstream hs(header_line);
    read_record(hs, delim, header);
  }
  auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  auto require = [&](const std::string& name) {
    auto idx = find_column(name);
    if (!idx) throw Error(ErrorKind::MissingColumn, "column '" + name + "' not found in header");
    return *idx;
  };
  const std::size_t case_col = require(columns.case_id);
  const std::size_t act_col = require(columns.activity);
  const std::size_t ts_col = require(columns.timestamp);
  const auto label_col = find_column(columns.label);

  EventLog log;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string> fields;
  std::size_t row = 1;
  while (read_record(in, delim, fields)) {
    ++row;
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() < header.size()) fields.resize(header.size());
    auto ts = parse_timestamp(fields[ts_col]);
    if (!ts)
      throw Error(ErrorKind::UnparseableTimestamp,
                  "row " + std::to_string(row) + ": '" + fields[ts_col] + "'");
    const std::string& case_id = fields[case_col];
    auto [it, inserted] = index.try_emplace(case_id, log.traces.size());
    if (inserted) {
      log.traces.emplace_back();
      log.traces.back().case_id = case_id;
    }
    Trace& trace = log.traces[it->second];
    Event e{fields[act_col], case_id, *ts, {}};
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == case_col || c == act_col || c == ts_col) continue;
      if (label_col && c == *label_col) continue;
      if (!fields[c].empty()) e.attributes[header[c]] = fields[c];
    }
    if (label_col && !fields[*label_col].empty()) {
      trace.attributes["label"] = fields[*label_col];
      trace.label = binary_label(fields[*label_col]);
    }
    trace.push_back(std::move(e));
  }
  if (log.traces.empty()) throw Error(ErrorKind::EmptyLog, "CSV has no event rows");

  for (auto& t : log.traces) {
    std::stable_sort(t.events.begin(), t.events.end(),
                     [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
    for (std::size_t i = 0; i < t.events.size(); ++i) t.activities[i] = t.events[i].activity;
  }
  log.recompute_alphabet();
  return log;
}

EventLog parse_csv(const std::filesystem::path& path, const ColumnMap& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  return parse_csv(in, columns);
}

void write_csv(const EventLog& log, std::ostream& out) {
  std::set<std::string> extra;
  bool any_label = false;
  for (const auto& t : log.traces) {
    any_label = any_label || t.label || t.attributes.count("label");
    for (const auto& e : t.events)
      for (const auto& [k, v] : e.attributes) extra.insert(k);
  }
  extra.erase("case_id");
  extra.erase("activity");
  extra.erase("timestamp");
  extra.erase("label");

  out << "case_id,activity,timestamp";
  if (any_label) out << ",label";
  for (const auto& k : extra) out << ',' << csv_escape(k);
  out << '\n';
  for (const auto& t : log.traces) {
    std::string label;
    if (t.label) label = std::to_string(*t.label);
    else if (auto it = t.attributes.find("label"); it != t.attributes.end()) label = it->second;
    for (const auto& e : t.events) {
      out << csv_escape(t.case_id) << ',' << csv_escape(e.activity) << ',' << format_timestamp(e.timestamp);
      if (any_label) out << ',' << csv_escape(label);
      for (const auto& k : extra) {
        auto it = e.attributes.find(k);
        out << ',' << (it == e.attributes.end() ? std::string() : csv_escape(it->second));
      }
      out << '\n';
    }
  }
}

void write_csv(const EventLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  write_csv(log, out);
}

EventLog load_log(const std::filesystem::path& path, const ColumnMap& columns) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".xes" || ext == ".xml") return parse_xes(path);
  return parse_csv(path, columns);
}

// ---------------------------------------------------------------------------
// Labeling and preprocessing

namespace {

std::string_view kind_name(LabelKind k) {
  switch (k) {
    case LabelKind::Attribute: return "attribute";
    case LabelKind::LtlfViolation: return "ltlf_violation";
    case LabelKind::LtlfSatisfaction: return "ltlf_satisfaction";
  }
  return "attribute";
}

}  // namespace

void LabelSpec::validate() const {
  if (kind == LabelKind::Attribute) {
    if (formula) throw Error(ErrorKind::InvalidArgument, "attribute label spec must not carry a formula");
  } else {
    if (!formula || formula->empty())
      throw Error(ErrorKind::InvalidArgument, std::string(kind_name(kind)) + " label spec requires a formula");
    if (attribute_name) throw Error(ErrorKind::InvalidArgument, "ltlf label spec must not carry attribute_name");
  }
}

LabelSpec LabelSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "label spec must be a JSON object");
  LabelSpec s;
  const std::string kind = j.value("kind", std::string("attribute"));
  if (kind == "attribute") s.kind = LabelKind::Attribute;
  else if (kind == "ltlf_violation") s.kind = LabelKind::LtlfViolation;
  else if (kind == "ltlf_satisfaction") s.kind = LabelKind::LtlfSatisfaction;
  else throw Error(ErrorKind::InvalidArgument, "unknown label kind '" + kind + "'");
  if (j.contains("attribute_name")) s.attribute_name = j.at("attribute_name").get<std::string>();
  if (j.contains("formula")) s.formula = j.at("formula").get<std::string>();
  if (j.contains("cut_activities")) s.cut_activities = j.at("cut_activities").get<std::vector<std::string>>();
  if (j.contains("positive_values")) s.positive_values = j.at("positive_values").get<std::vector<std::string>>();
  s.validate();
  return s;
}

nlohmann::json LabelSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = kind_name(kind);
  if (attribute_name) j["attribute_name"] = *attribute_name;
  if (formula) j["formula"] = *formula;
  j["cut_activities"] = cut_activities;
  if (kind == LabelKind::Attribute) j["positive_values"] = positive_values;
  return j;
}

EventLog label_traces(EventLog log, const LabelSpec& spec) {
  spec.validate();
  if (spec.kind == LabelKind::Attribute) {
    const std::string name = spec.attribute_name.value_or("label");
    for (auto& t : log.traces) {
      std::optional<std::string> value;
      if (auto it = t.attributes.find(name); it != t.attributes.end()) value = it->second;
      else if (!t.events.empty())
        if (auto e = t.events.front().attributes.find(name); e != t.events.front().attributes.end())
          value = e->second;
      if (!value) throw Error(ErrorKind::MissingLabelAttribute, t.case_id);
      const bool positive = std::find(spec.positive_values.begin(), spec.positive_values.end(), *value) !=
                            spec.positive_values.end();
      t.label = positive ? 1 : 0;
    }
    return log;
  }
  auto parsed = parse_ltlf(*spec.formula, log.alphabet);
  for (const auto& w : parsed.warnings) warn(w);
  for (auto& t : log.traces) {
    const bool holds = ltlf_eval(parsed.formula, t.activities);
    const bool violated = !holds;
    t.label = (spec.kind == LabelKind::LtlfViolation) == violated ? 1 : 0;
  }
  return log;
}

EventLog cut_traces_before(EventLog log, const std::set<std::string>& activities) {
  if (activities.empty()) return log;
  for (auto& t : log.traces) {
    auto it = std::find_if(t.activities.begin(), t.activities.end(),
                           [&](const std::string& a) { return activities.count(a) > 0; });
    const auto k = static_cast<std::size_t>(it - t.activities.begin());
    if (k == t.activities.size()) continue;
    t.activities.resize(k);
    if (t.events.size() > k) t.events.resize(k);
  }
  log.recompute_alphabet();
  return log;
}

EventLog prepare_log(EventLog log, const LabelSpec& spec) {
  log = label_traces(std::move(log), spec);
  log = cut_traces_before(std::move(log), std::set<std::string>(spec.cut_activities.begin(), spec.cut_activities.end()));
  const std::size_t before = log.traces.size();
  std::erase_if(log.traces, [](const Trace& t) { return t.empty(); });
  if (log.traces.size() != before)
    warn("dropped " + std::to_string(before - log.traces.size()) + " empty trace(s) after cutting");
  if (log.traces.empty()) throw Error(ErrorKind::EmptyLog, "no traces left after preprocessing");
  log.recompute_alphabet();
  return log;
}

// ---------------------------------------------------------------------------
// Splits and prefixes

void SplitConfig::validate() const {
  if (!(train_fraction > 0 && val_fraction > 0 && test_fraction > 0))
    throw Error(ErrorKind::InvalidArgument, "split fractions must be positive");
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "split fractions must sum to 1");
}

SplitLogs chronological_split(const EventLog& log, const SplitConfig& cfg) {
  cfg.validate();
  std::vector<const Trace*> order;
  for (const auto& t : log.traces) {
    if (t.events.empty()) throw Error(ErrorKind::InvalidArgument, "trace '" + t.case_id + "' has no first event");
    order.push_back(&t);
  }
  std::stable_sort(order.begin(), order.end(), [](const Trace* a, const Trace* b) {
    return a->events.front().timestamp < b->events.front().timestamp;
  });

  const auto n = static_cast<long long>(order.size());
  const long long n_train = std::llround(cfg.train_fraction * static_cast<double>(n));
  const long long n_val = std::llround((cfg.train_fraction + cfg.val_fraction) * static_cast<double>(n)) - n_train;
  const long long n_test = n - n_train - n_val;
  if (n_train <= 0 || n_val <= 0 || n_test <= 0)
    throw Error(ErrorKind::EmptySplit, std::to_string(n) + " traces split into " + std::to_string(n_train) + "/" +
                                           std::to_string(n_val) + "/" + std::to_string(n_test));

  SplitLogs out;
  for (long long i = 0; i < n; ++i) {
    EventLog& dst = i < n_train ? out.train : (i < n_train + n_val ? out.val : out.test);
    dst.traces.push_back(*order[static_cast<std::size_t>(i)]);
  }
  const Timestamp test_start = out.test.traces.front().events.front().timestamp;
  for (EventLog* part : {&out.train, &out.val}) {
    for (auto& t : part->traces) {
      auto it = std::find_if(t.events.begin(), t.events.end(),
                             [&](const Event& e) { return e.timestamp >= test_start; });
      const auto k = static_cast<std::size_t>(it - t.events.begin());
      t.events.resize(k);
      t.activities.resize(k);
    }
    const std::size_t before = part->traces.size();
    std::erase_if(part->traces, [](const Trace& t) { return t.empty(); });
    if (part->traces.size() != before)
      warn("dropped " + std::to_string(before - part->traces.size()) + " trace(s) lying entirely in the test period");
    if (part->traces.empty()) throw Error(ErrorKind::EmptySplit, "partition empty after removing test-period events");
  }
  out.train.recompute_alphabet();
  out.val.recompute_alphabet();
  out.test.recompute_alphabet();
  return out;
}

PrefixLog make_prefix_log(const EventLog& log, std::size_t max_k) {
  if (max_k < 1) throw Error(ErrorKind::InvalidArgument, "max_k must be at least 1");
  PrefixLog out;
  out.sources = log.traces;
  for (std::size_t s = 0; s < out.sources.size(); ++s) {
    const Trace& t = out.sources[s];
    if (!t.label) throw Error(ErrorKind::MissingLabelAttribute, t.case_id);
    const std::size_t kmax = t.size() == 0 ? 0 : std::min(max_k, t.size() - 1);
    for (std::size_t k = 1; k <= kmax; ++k)
      out.entries.push_back(PrefixEntry{t.case_id, s, k, t.prefix(k), *t.label});
  }
  return out;
}

std::size_t nearest_rank_percentile(std::vector<std::size_t> values, double percentile) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "percentile of an empty list");
  if (!(percentile > 0.0 && percentile <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "percentile must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(values.size()) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

std::size_t prefix_cap_for(std::string_view dataset_name, std::span<const std::size_t> lengths) {
  std::string name(dataset_name);
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  if (name.starts_with("traffic_fines")) return 9;
  const std::size_t p90 = nearest_rank_percentile({lengths.begin(), lengths.end()}, 0.9);
  const std::size_t limit = name.starts_with("bpic2017") ? 20 : 40;
  return std::max<std::size_t>(1, std::min(limit, p90));
}

std::vector<std::size_t> case_lengths(const EventLog& log) {
  std::vector<std::size_t> out;
  out.reserve(log.traces.size());
  for (const auto& t : log.traces) out.push_back(t.size());
  return out;
}

}  // namespace ppm
