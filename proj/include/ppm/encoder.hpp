#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ppm/declare.hpp"
#include "ppm/logio.hpp"

namespace ppm {

/// Ordered constraint set; position defines the encoded column.
struct ConstraintUniverse {
  std::vector<Constraint> constraints;
  std::set<Family> families;
  std::set<std::string> alphabet;

  std::size_t size() const noexcept { return constraints.size(); }
  bool empty() const noexcept { return constraints.empty(); }
  const Constraint& operator[](std::size_t i) const { return constraints[i]; }
  std::optional<std::size_t> index_of(const Constraint& c) const;

  nlohmann::json to_json() const;
  static ConstraintUniverse from_json(const nlohmann::json& j);
};

/// Unary templates per activity and per n; binary templates per ordered pair of
/// distinct activities. Order: template, then n, then activation, then target.
ConstraintUniverse build_universe(const std::set<std::string>& alphabet, const std::set<Family>& families,
                                  const std::set<int>& existence_ns = {1});

/// Keeps unary constraints whose activity occurs in at least support*|log| traces
/// and binary constraints whose two activities co-occur in that many traces.
ConstraintUniverse apriori_filter(const ConstraintUniverse& universe, const EventLog& log, double support);

struct EncodedDataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> matrix;  // row-major RV codes
  std::vector<int> labels;
  std::vector<std::string> row_ids;  // case id, or "case_id#k" for prefixes
  ConstraintUniverse universe;

  std::uint8_t at(std::size_t r, std::size_t c) const { return matrix[r * cols + c]; }
  std::span<const std::uint8_t> row(std::size_t r) const { return {matrix.data() + r * cols, cols}; }

  /// Projects onto `sub`, whose constraints must all be columns of this dataset.
  EncodedDataset select_columns(const ConstraintUniverse& sub) const;
  /// Rows in `indices` order.
  EncodedDataset select_rows(std::span<const std::size_t> indices) const;

  void write_csv(std::ostream& out) const;
  void write_binary(const std::filesystem::path& path) const;
  static EncodedDataset read_binary(const std::filesystem::path& path);
};

/// Resolves constraint activities to dense ids once; reused across rows.
class TraceEncoder {
public:
  explicit TraceEncoder(const ConstraintUniverse& universe);
  std::vector<std::uint8_t> encode(std::span<const std::string> trace, bool done) const;
  void encode_into(std::span<const std::string> trace, bool done, std::span<std::uint8_t> out) const;
  /// RV state of every column on `trace`.
  std::vector<RVState> states(std::span<const std::string> trace, bool done) const;

private:
  std::vector<int> to_ids(std::span<const std::string> trace) const;
  std::vector<CompiledConstraint> compiled_;
  std::vector<std::string> id_names_;
};

EncodedDataset encode(const EventLog& log, const ConstraintUniverse& universe, bool done);
EncodedDataset encode(const PrefixLog& prefixes, const ConstraintUniverse& universe, bool done = false);

enum class TopH : std::uint8_t { Half, Thirty, Sqrt };

std::string_view top_h_name(TopH h);
std::optional<TopH> top_h_from_name(std::string_view name);
/// Number of features kept out of p; never zero when p > 0.
std::size_t top_h_count(TopH h, std::size_t p);

/// Plug-in estimate of I(column; label) in nats from the joint counts.
double mutual_information(const EncodedDataset& data, std::size_t column);
/// Columns by descending mutual information; ties keep the lower column first.
std::vector<std::size_t> mutual_info_order(const EncodedDataset& data);
/// The top-h columns, returned in their original column order.
ConstraintUniverse mutual_info_rank(const EncodedDataset& train, TopH h);

struct FeatureSelectionConfig {
  double apriori_support = 0.05;
  TopH top_h = TopH::Half;
};

}  // namespace ppm
