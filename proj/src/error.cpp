#include "exceed/error.hpp"

#include <iostream>
#include <mutex>

namespace exceed {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidInput: return "InvalidInput";
    case Errc::InvalidCount: return "InvalidCount";
    case Errc::InsufficientLocalData: return "InsufficientLocalData";
    case Errc::SingularLocalDesign: return "SingularLocalDesign";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::EmptyTrajectory: return "EmptyTrajectory";
    case Errc::DeltaOutOfRange: return "DeltaOutOfRange";
    case Errc::EmptyCentralityDomain: return "EmptyCentralityDomain";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::SingularCovariance: return "SingularCovariance";
    case Errc::DegenerateLocalDesign: return "DegenerateLocalDesign";
    case Errc::ThresholdOutOfRange: return "ThresholdOutOfRange";
    case Errc::ParseError: return "ParseError";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

void rethrow_with_context(const Error& e, const std::string& context) {
  throw Error(e.code(), context + ": " + e.what());
}

namespace {

std::mutex sink_mutex;

DiagnosticSink& sink_slot() {
  static DiagnosticSink sink = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return sink;
}

}  // namespace

DiagnosticSink set_diagnostic_sink(DiagnosticSink sink) {
  std::lock_guard lock(sink_mutex);
  auto previous = std::move(sink_slot());
  sink_slot() = std::move(sink);
  return previous;
}

void diagnostic(std::string_view message) {
  std::lock_guard lock(sink_mutex);
  if (sink_slot()) sink_slot()(message);
}

}  // namespace exceed
