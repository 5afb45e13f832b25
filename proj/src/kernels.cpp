#include "exceed/kernels.hpp"

#include <string>

#include "exceed/error.hpp"

namespace exceed {

double KernelSpec::lipschitz() const {
  switch (family) {
    case KernelFamily::epanechnikov: return 1.5;
    case KernelFamily::triangular: return 1.0;
    // max |d/du (15/16)(1-u^2)^2| = (15/4) u (1-u^2) at u = 1/sqrt(3)
    case KernelFamily::quartic: return 15.0 / (6.0 * std::sqrt(3.0));
  }
  return 0.0;
}

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::epanechnikov: return "epanechnikov";
    case KernelFamily::triangular: return "triangular";
    case KernelFamily::quartic: return "quartic";
  }
  return "unknown";
}

KernelSpec parse_kernel(std::string_view name) {
  if (name == "epanechnikov") return {KernelFamily::epanechnikov};
  if (name == "triangular") return {KernelFamily::triangular};
  if (name == "quartic") return {KernelFamily::quartic};
  throw Error(Errc::ConfigError, "unknown kernel '" + std::string(name) + "'");
}

}  // namespace exceed
