#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ppm {

enum class ErrorKind {
  MissingColumn,
  UnparseableTimestamp,
  EmptyLog,
  MalformedXml,
  MissingConceptName,
  MissingLabelAttribute,
  EmptySplit,
  SyntaxError,
  InvalidStats,
  EmptyUniverse,
  WidthMismatch,
  NoPositivePath,
  IoError,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Every recoverable failure of the library. `kind()` identifies the
/// contract violation; the message carries the offending value.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class SyntaxError : public Error {
public:
  SyntaxError(std::size_t position, std::string expected);
  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

private:
  std::size_t position_;
  std::string expected_;
};

// Non-fatal diagnostics (dropped traces, unknown atoms, degenerate data).
// Defaults to stderr; tests swap the sink to capture them.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace ppm
