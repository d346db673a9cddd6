#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ppm {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// Accepts ISO-8601 ("2014-10-22T11:15:41.000+02:00", "2014-10-22 11:15:41",
/// trailing Z or numeric offset) and epoch seconds ("1413976541", "1413976541.5").
/// Returns nullopt on anything else.
std::optional<Timestamp> parse_timestamp(std::string_view text);
/// Always UTC, millisecond precision: "2014-10-22T09:15:41.000Z".
std::string format_timestamp(Timestamp ts);

struct Event {
  std::string activity;
  std::string case_id;
  Timestamp timestamp{};
  std::map<std::string, std::string> attributes;
};

struct Trace {
  std::string case_id;
  std::vector<std::string> activities;
  std::vector<Event> events;
  std::optional<int> label;
  // Case-level attributes (XES trace attributes, the CSV label column).
  std::map<std::string, std::string> attributes;

  std::size_t size() const noexcept { return activities.size(); }
  bool empty() const noexcept { return activities.empty(); }
  Trace prefix(std::size_t k) const;
  void push_back(Event e);
  /// Builds a trace from bare activity names (timestamps one second apart).
  static Trace from_activities(std::string case_id, std::span<const std::string> activities);
  static Trace from_activities(std::string case_id, std::initializer_list<std::string> activities);
};

struct EventLog {
  std::vector<Trace> traces;
  std::set<std::string> alphabet;

  std::size_t size() const noexcept { return traces.size(); }
  void recompute_alphabet();
};

/// Issues a validator would flag: empty traces, unsorted events, duplicate ids.
std::vector<std::string> validate(const EventLog& log);

struct PrefixEntry {
  std::string source_case_id;
  std::size_t source_index = 0;  // index into PrefixLog::sources
  std::size_t k = 0;
  Trace prefix;
  int label = 0;
};

struct PrefixLog {
  std::vector<Trace> sources;
  std::vector<PrefixEntry> entries;

  const Trace& source_of(const PrefixEntry& e) const { return sources.at(e.source_index); }
};

enum class LabelKind { Attribute, LtlfViolation, LtlfSatisfaction };

struct LabelSpec {
  LabelKind kind = LabelKind::Attribute;
  std::optional<std::string> attribute_name;
  std::optional<std::string> formula;
  std::vector<std::string> cut_activities;
  // Attribute values mapped to label 1; anything else maps to 0.
  std::vector<std::string> positive_values{"1", "true"};

  void validate() const;
  static LabelSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct SplitConfig {
  double train_fraction = 0.70;
  double val_fraction = 0.10;
  double test_fraction = 0.20;

  void validate() const;
};

struct ColumnMap {
  std::string case_id = "case_id";
  std::string activity = "activity";
  std::string timestamp = "timestamp";
  std::string label = "label";
  char delimiter = '\0';  // '\0' sniffs ',' or ';' from the header
};

EventLog parse_csv(const std::filesystem::path& path, const ColumnMap& columns = {});
EventLog parse_csv(std::istream& in, const ColumnMap& columns = {});
void write_csv(const EventLog& log, std::ostream& out);
void write_csv(const EventLog& log, const std::filesystem::path& path);

EventLog parse_xes(const std::filesystem::path& path);
EventLog parse_xes(std::istream& in);

/// Dispatches on extension: .xes/.xml -> XES, anything else -> CSV.
EventLog load_log(const std::filesystem::path& path, const ColumnMap& columns = {});

EventLog label_traces(EventLog log, const LabelSpec& spec);
EventLog cut_traces_before(EventLog log, const std::set<std::string>& activities);
/// Labels, cuts, and drops empty traces: the whole per-dataset preprocessing.
EventLog prepare_log(EventLog log, const LabelSpec& spec);

struct SplitLogs {
  EventLog train;
  EventLog val;
  EventLog test;
};

SplitLogs chronological_split(const EventLog& log, const SplitConfig& cfg = {});

PrefixLog make_prefix_log(const EventLog& log, std::size_t max_k);

std::size_t nearest_rank_percentile(std::vector<std::size_t> values, double percentile);
std::size_t prefix_cap_for(std::string_view dataset_name, std::span<const std::size_t> case_lengths);
std::vector<std::size_t> case_lengths(const EventLog& log);

}  // namespace ppm
