#include "ppm/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "ppm/error.hpp"

namespace ppm {

// ---------------------------------------------------------------------------
// Universe

std::optional<std::size_t> ConstraintUniverse::index_of(const Constraint& c) const {
  auto it = std::find(constraints.begin(), constraints.end(), c);
  if (it == constraints.end()) return std::nullopt;
  return static_cast<std::size_t>(it - constraints.begin());
}

namespace {

nlohmann::json constraint_to_json(const Constraint& c) {
  nlohmann::json j{{"template", template_name(c.tmpl)}, {"activation", c.activation}};
  if (arity(c.tmpl) == 2) j["target"] = c.target;
  if (takes_n(c.tmpl)) j["n"] = c.n;
  return j;
}

Constraint constraint_from_json(const nlohmann::json& j) {
  if (j.is_string()) return Constraint::parse(j.get<std::string>());
  auto t = template_from_name(j.at("template").get<std::string>());
  if (!t) throw Error(ErrorKind::InvalidArgument, "unknown template " + j.at("template").dump());
  if (arity(*t) == 2)
    return Constraint::binary(*t, j.at("activation").get<std::string>(), j.at("target").get<std::string>());
  return Constraint::unary(*t, j.at("activation").get<std::string>(), j.value("n", 1));
}

}  // namespace

nlohmann::json ConstraintUniverse::to_json() const {
  nlohmann::json fams = nlohmann::json::array();
  for (Family f : families) fams.push_back(family_name(f));
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : constraints) cs.push_back(constraint_to_json(c));
  return {{"families", fams}, {"alphabet", alphabet}, {"constraints", cs}};
}

ConstraintUniverse ConstraintUniverse::from_json(const nlohmann::json& j) {
  ConstraintUniverse u;
  for (const auto& f : j.at("families")) {
    auto fam = family_from_name(f.get<std::string>());
    if (!fam) throw Error(ErrorKind::InvalidArgument, "unknown family " + f.dump());
    u.families.insert(*fam);
  }
  u.alphabet = j.at("alphabet").get<std::set<std::string>>();
  for (const auto& c : j.at("constraints")) u.constraints.push_back(constraint_from_json(c));
  return u;
}

ConstraintUniverse build_universe(const std::set<std::string>& alphabet, const std::set<Family>& families,
                                  const std::set<int>& existence_ns) {
  if (existence_ns.empty()) throw Error(ErrorKind::InvalidArgument, "existence_ns must not be empty");
  ConstraintUniverse u;
  u.families = families;
  u.alphabet = alphabet;
  for (Template t : all_templates()) {
    if (!families.count(family_of(t))) continue;
    if (arity(t) == 1) {
      if (takes_n(t)) {
        for (int n : existence_ns)
          for (const auto& a : alphabet)
            // absence is instantiated one above the count it bounds.
            u.constraints.push_back(Constraint::unary(t, a, t == Template::Absence ? n + 1 : n));
      } else {
        for (const auto& a : alphabet) u.constraints.push_back(Constraint::unary(t, a));
      }
    } else {
      for (const auto& a : alphabet)
        for (const auto& b : alphabet)
          if (a != b) u.constraints.push_back(Constraint::binary(t, a, b));
    }
  }
  return u;
}

ConstraintUniverse apriori_filter(const ConstraintUniverse& universe, const EventLog& log, double support) {
  if (!(support > 0.0 && support <= 1.0)) throw Error(ErrorKind::InvalidArgument, "support must lie in (0, 1]");
  std::unordered_map<std::string, std::size_t> single;
  std::map<std::pair<std::string, std::string>, std::size_t> pairs;
  for (const auto& t : log.traces) {
    std::set<std::string> present(t.activities.begin(), t.activities.end());
    for (const auto& a : present) ++single[a];
    for (auto i = present.begin(); i != present.end(); ++i)
      for (auto j = std::next(i); j != present.end(); ++j) ++pairs[{*i, *j}];
  }
  const double threshold = support * static_cast<double>(log.size()) - 1e-9;
  ConstraintUniverse out;
  out.families = universe.families;
  out.alphabet = universe.alphabet;
  for (const auto& c : universe.constraints) {
    std::size_t count = 0;
    if (arity(c.tmpl) == 1) {
      if (auto it = single.find(c.activation); it != single.end()) count = it->second;
    } else {
      auto key = std::minmax(c.activation, c.target);
      if (auto it = pairs.find({key.first, key.second}); it != pairs.end()) count = it->second;
    }
    if (static_cast<double>(count) >= threshold) out.constraints.push_back(c);
  }
  if (out.empty()) throw Error(ErrorKind::EmptyUniverse, "no constraint reaches support " + std::to_string(support));
  return out;
}

// ---------------------------------------------------------------------------
// Encoding

TraceEncoder::TraceEncoder(const ConstraintUniverse& universe) {
  std::unordered_map<std::string, int> ids;
  auto id_of = [&](const std::string& name) {
    auto [it, inserted] = ids.try_emplace(name, static_cast<int>(id_names_.size()));
    if (inserted) id_names_.push_back(name);
    return it->second;
  };
  compiled_.reserve(universe.size());
  for (const auto& c : universe.constraints)
    compiled_.push_back({c.tmpl, c.n, id_of(c.activation), arity(c.tmpl) == 2 ? id_of(c.target) : -1});
}

std::vector<int> TraceEncoder::to_ids(std::span<const std::string> trace) const {
  std::vector<int> out(trace.size(), -1);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    // Few distinct names per universe; linear probing beats hashing here.
    for (std::size_t k = 0; k < id_names_.size(); ++k) {
      if (id_names_[k] == trace[i]) {
        out[i] = static_cast<int>(k);
        break;
      }
    }
  }
  return out;
}

void TraceEncoder::encode_into(std::span<const std::string> trace, bool done, std::span<std::uint8_t> out) const {
  if (out.size() != compiled_.size()) throw Error(ErrorKind::WidthMismatch, "output row width differs from universe");
  const auto ids = to_ids(trace);
  for (std::size_t j = 0; j < compiled_.size(); ++j) {
    const auto& c = compiled_[j];
    out[j] = code(rv_state(c.tmpl, c.n, count_stats(c, ids, done)));
  }
}

std::vector<std::uint8_t> TraceEncoder::encode(std::span<const std::string> trace, bool done) const {
  std::vector<std::uint8_t> row(compiled_.size());
  encode_into(trace, done, row);
  return row;
}

std::vector<RVState> TraceEncoder::states(std::span<const std::string> trace, bool done) const {
  std::vector<RVState> out;
  out.reserve(compiled_.size());
  for (auto c : encode(trace, done)) out.push_back(static_cast<RVState>(c));
  return out;
}

EncodedDataset encode(const EventLog& log, const ConstraintUniverse& universe, bool done) {
  EncodedDataset d;
  d.rows = log.size();
  d.cols = universe.size();
  d.universe = universe;
  d.matrix.resize(d.rows * d.cols);
  TraceEncoder enc(universe);
  for (std::size_t r = 0; r < d.rows; ++r) {
    const auto& t = log.traces[r];
    enc.encode_into(t.activities, done, {d.matrix.data() + r * d.cols, d.cols});
    d.labels.push_back(t.label.value_or(0));
    d.row_ids.push_back(t.case_id);
  }
  return d;
}

EncodedDataset encode(const PrefixLog& prefixes, const ConstraintUniverse& universe, bool done) {
  EncodedDataset d;
  d.rows = prefixes.entries.size();
  d.cols = universe.size();
  d.universe = universe;
  d.matrix.resize(d.rows * d.cols);
  TraceEncoder enc(universe);
  for (std::size_t r = 0; r < d.rows; ++r) {
    const auto& e = prefixes.entries[r];
    enc.encode_into(e.prefix.activities, done, {d.matrix.data() + r * d.cols, d.cols});
    d.labels.push_back(e.label);
    d.row_ids.push_back(e.source_case_id + "#" + std::to_string(e.k));
  }
  return d;
}

EncodedDataset EncodedDataset::select_columns(const ConstraintUniverse& sub) const {
  std::vector<std::size_t> cols_idx;
  for (const auto& c : sub.constraints) {
    auto idx = universe.index_of(c);
    if (!idx) throw Error(ErrorKind::WidthMismatch, "constraint '" + c.to_string() + "' is not a column");
    cols_idx.push_back(*idx);
  }
  EncodedDataset d;
  d.rows = rows;
  d.cols = cols_idx.size();
  d.universe = sub;
  d.labels = labels;
  d.row_ids = row_ids;
  d.matrix.resize(d.rows * d.cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < d.cols; ++j) d.matrix[r * d.cols + j] = at(r, cols_idx[j]);
  return d;
}

EncodedDataset EncodedDataset::select_rows(std::span<const std::size_t> indices) const {
  EncodedDataset d;
  d.rows = indices.size();
  d.cols = cols;
  d.universe = universe;
  d.matrix.reserve(d.rows * d.cols);
  for (auto r : indices) {
    auto src = row(r);
    d.matrix.insert(d.matrix.end(), src.begin(), src.end());
    d.labels.push_back(labels[r]);
    d.row_ids.push_back(row_ids[r]);
  }
  return d;
}

void EncodedDataset::write_csv(std::ostream& out) const {
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  out << "row_id";
  for (const auto& c : universe.constraints) out << ',' << quote(c.to_string());
  out << ",label\n";
  for (std::size_t r = 0; r < rows; ++r) {
    out << quote(row_ids[r]);
    for (std::size_t c = 0; c < cols; ++c) out << ',' << static_cast<int>(at(r, c));
    out << ',' << labels[r] << '\n';
  }
}

namespace {

constexpr char kMagic[8] = {'P', 'P', 'M', 'E', 'N', 'C', '1', '\n'};

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error(ErrorKind::IoError, "truncated encoding cache");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  std::string s(get_u64(in), '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(s.size()))) throw Error(ErrorKind::IoError, "truncated encoding cache");
  return s;
}

}  // namespace

// Layout: magic, universe JSON, rows, cols, matrix bytes, labels (one byte each), row ids.
void EncodedDataset::write_binary(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  out.write(kMagic, sizeof kMagic);
  put_string(out, universe.to_json().dump());
  put_u64(out, rows);
  put_u64(out, cols);
  out.write(reinterpret_cast<const char*>(matrix.data()), static_cast<std::streamsize>(matrix.size()));
  for (int l : labels) out.put(static_cast<char>(l));
  for (const auto& id : row_ids) put_string(out, id);
  if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path.string() + "'");
}

EncodedDataset EncodedDataset::read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw Error(ErrorKind::IoError, "'" + path.string() + "' is not an encoding cache");
  EncodedDataset d;
  d.universe = ConstraintUniverse::from_json(nlohmann::json::parse(get_string(in)));
  d.rows = get_u64(in);
  d.cols = get_u64(in);
  if (d.cols != d.universe.size()) throw Error(ErrorKind::WidthMismatch, "cache width differs from its universe");
  d.matrix.resize(d.rows * d.cols);
  if (!in.read(reinterpret_cast<char*>(d.matrix.data()), static_cast<std::streamsize>(d.matrix.size())))
    throw Error(ErrorKind::IoError, "truncated encoding cache");
  for (std::size_t r = 0; r < d.rows; ++r) {
    char c;
    if (!in.get(c)) throw Error(ErrorKind::IoError, "truncated encoding cache");
    d.labels.push_back(static_cast<int>(c));
  }
  for (std::size_t r = 0; r < d.rows; ++r) d.row_ids.push_back(get_string(in));
  return d;
}

// ---------------------------------------------------------------------------
// Feature selection

std::string_view top_h_name(TopH h) {
  switch (h) {
    case TopH::Half: return "50%";
    case TopH::Thirty: return "30%";
    case TopH::Sqrt: return "sqrt";
  }
  return "50%";
}

std::optional<TopH> top_h_from_name(std::string_view name) {
  for (TopH h : {TopH::Half, TopH::Thirty, TopH::Sqrt})
    if (top_h_name(h) == name) return h;
  return std::nullopt;
}

std::size_t top_h_count(TopH h, std::size_t p) {
  if (p == 0) return 0;
  double k = 0;
  switch (h) {
    case TopH::Half: k = std::floor(0.5 * static_cast<double>(p)); break;
    case TopH::Thirty: k = std::floor(0.3 * static_cast<double>(p) + 1e-9); break;
    case TopH::Sqrt: k = std::floor(std::sqrt(static_cast<double>(p)) + 1e-9); break;
  }
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, p);
}

double mutual_information(const EncodedDataset& data, std::size_t column) {
  if (column >= data.cols) throw Error(ErrorKind::WidthMismatch, "column out of range");
  if (data.rows == 0) return 0.0;
  double joint[4][2] = {};
  for (std::size_t r = 0; r < data.rows; ++r) joint[data.at(r, column) & 3][data.labels[r] ? 1 : 0] += 1;
  const double n = static_cast<double>(data.rows);
  double px[4] = {}, py[2] = {};
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 2; ++y) {
      px[x] += joint[x][y];
      py[y] += joint[x][y];
    }
  double mi = 0.0;
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 2; ++y) {
      if (joint[x][y] == 0) continue;
      mi += joint[x][y] / n * std::log(joint[x][y] * n / (px[x] * py[y]));
    }
  return std::max(0.0, mi);
}

std::vector<std::size_t> mutual_info_order(const EncodedDataset& data) {
  std::vector<double> mi(data.cols);
  for (std::size_t c = 0; c < data.cols; ++c) mi[c] = mutual_information(data, c);
  std::vector<std::size_t> order(data.cols);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mi[a] > mi[b]; });
  return order;
}

ConstraintUniverse mutual_info_rank(const EncodedDataset& train, TopH h) {
  auto order = mutual_info_order(train);
  order.resize(top_h_count(h, order.size()));
  std::sort(order.begin(), order.end());
  ConstraintUniverse out;
  out.families = train.universe.families;
  out.alphabet = train.universe.alphabet;
  for (auto c : order) out.constraints.push_back(train.universe[c]);
  return out;
}

}  // namespace ppm
