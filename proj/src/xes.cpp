#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "ppm/error.hpp"
#include "ppm/logio.hpp"

namespace ppm {

namespace {

namespace pt = boost::property_tree;

bool is_attribute_tag(const std::string& tag) {
  static const std::unordered_set<std::string> tags{"string", "date", "int", "float", "boolean", "id"};
  return tags.count(tag) > 0;
}

// Flat key/value view of the typed XES attribute children of `node`.
std::map<std::string, std::string> read_attributes(const pt::ptree& node) {
  std::map<std::string, std::string> out;
  for (const auto& [tag, child] : node) {
    if (!is_attribute_tag(tag)) continue;
    auto key = child.get_optional<std::string>("<xmlattr>.key");
    auto value = child.get_optional<std::string>("<xmlattr>.value");
    if (key && value) out[*key] = *value;
  }
  return out;
}

Trace read_trace(const pt::ptree& node, std::size_t index) {
  Trace trace;
  trace.attributes = read_attributes(node);
  auto name = trace.attributes.find("concept:name");
  if (name == trace.attributes.end())
    throw Error(ErrorKind::MissingConceptName, "trace #" + std::to_string(index) + " has no concept:name");
  trace.case_id = name->second;
  trace.attributes.erase(name);

  std::size_t event_index = 0;
  for (const auto& [tag, child] : node) {
    if (tag != "event") continue;
    auto attrs = read_attributes(child);
    auto act = attrs.find("concept:name");
    if (act == attrs.end())
      throw Error(ErrorKind::MissingConceptName,
                  "event #" + std::to_string(event_index) + " of trace '" + trace.case_id + "'");
    auto ts_attr = attrs.find("time:timestamp");
    if (ts_attr == attrs.end())
      throw Error(ErrorKind::UnparseableTimestamp,
                  "event #" + std::to_string(event_index) + " of trace '" + trace.case_id + "' has no time:timestamp");
    auto ts = parse_timestamp(ts_attr->second);
    if (!ts) throw Error(ErrorKind::UnparseableTimestamp, "'" + ts_attr->second + "' in trace '" + trace.case_id + "'");
    Event e{act->second, trace.case_id, *ts, {}};
    attrs.erase("concept:name");
    attrs.erase("time:timestamp");
    e.attributes = std::move(attrs);
    trace.push_back(std::move(e));
    ++event_index;
  }
  std::stable_sort(trace.events.begin(), trace.events.end(),
                   [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
  for (std::size_t i = 0; i < trace.events.size(); ++i) trace.activities[i] = trace.events[i].activity;
  return trace;
}

}  // namespace

EventLog parse_xes(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorKind::MalformedXml, e.what());
  }
  auto root = tree.get_child_optional("log");
  if (!root) throw Error(ErrorKind::MalformedXml, "missing <log> root element");

  EventLog log;
  std::size_t index = 0;
  for (const auto& [tag, child] : *root) {
    if (tag != "trace") continue;
    log.traces.push_back(read_trace(child, index++));
  }
  if (log.traces.empty()) throw Error(ErrorKind::EmptyLog, "XES log has no traces");
  log.recompute_alphabet();
  return log;
}

EventLog parse_xes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  return parse_xes(in);
}

}  // namespace ppm
