#include "ppm/error.hpp"

#include <iostream>
#include <mutex>

namespace ppm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::UnparseableTimestamp: return "UnparseableTimestamp";
    case ErrorKind::EmptyLog: return "EmptyLog";
    case ErrorKind::MalformedXml: return "MalformedXml";
    case ErrorKind::MissingConceptName: return "MissingConceptName";
    case ErrorKind::MissingLabelAttribute: return "MissingLabelAttribute";
    case ErrorKind::EmptySplit: return "EmptySplit";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::InvalidStats: return "InvalidStats";
    case ErrorKind::EmptyUniverse: return "EmptyUniverse";
    case ErrorKind::WidthMismatch: return "WidthMismatch";
    case ErrorKind::NoPositivePath: return "NoPositivePath";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

SyntaxError::SyntaxError(std::size_t position, std::string expected)
    : Error(ErrorKind::SyntaxError,
            "at position " + std::to_string(position) + ", expected " + expected),
      position_(position),
      expected_(std::move(expected)) {}

namespace {
std::mutex sink_mutex;
WarningSink& sink() {
  static WarningSink s = [](std::string_view msg) { std::cerr << "[w] " << msg << '\n'; };
  return s;
}
}  // namespace

void set_warning_sink(WarningSink s) {
  std::lock_guard lock(sink_mutex);
  sink() = s ? std::move(s) : [](std::string_view msg) { std::cerr << "[w] " << msg << '\n'; };
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex);
  sink()(message);
}

}  // namespace ppm
