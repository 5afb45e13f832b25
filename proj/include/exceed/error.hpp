#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace exceed {

/// Failure categories. The CLI prints the category name verbatim so scripts
/// can match on it.
enum class Errc {
  InvalidInput,
  InvalidCount,
  InsufficientLocalData,
  SingularLocalDesign,
  InsufficientData,
  EmptyTrajectory,
  DeltaOutOfRange,
  EmptyCentralityDomain,
  GridMismatch,
  LengthMismatch,
  SingularCovariance,
  DegenerateLocalDesign,
  ThresholdOutOfRange,
  ParseError,
  ConfigError,
  IoError,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Rethrows `e` with `context` prepended to its message, keeping the category.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

// Non-fatal diagnostics (extrapolation, large projection corrections).
using DiagnosticSink = std::function<void(std::string_view)>;

/// Installs a sink and returns the previous one. The default writes to stderr.
DiagnosticSink set_diagnostic_sink(DiagnosticSink sink);
void diagnostic(std::string_view message);

}  // namespace exceed
