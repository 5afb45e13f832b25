#pragma once

#include <cmath>
#include <string_view>

namespace exceed {

/// Compactly supported kernel families on [-1, 1], each a probability density.
enum class KernelFamily { epanechnikov, triangular, quartic };

struct KernelSpec {
  KernelFamily family = KernelFamily::epanechnikov;

  template <typename Scalar>
  Scalar operator()(Scalar u) const {
    const Scalar a = std::abs(u);
    if (a >= Scalar(1)) return Scalar(0);
    switch (family) {
      case KernelFamily::epanechnikov:
        return Scalar(0.75) * (Scalar(1) - u * u);
      case KernelFamily::triangular:
        return Scalar(1) - a;
      case KernelFamily::quartic: {
        const Scalar v = Scalar(1) - u * u;
        return Scalar(15) / Scalar(16) * v * v;
      }
    }
    return Scalar(0);
  }

  /// Lipschitz constant on the support.
  double lipschitz() const;

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string_view to_string(KernelFamily family);

/// Parses "epanechnikov", "triangular" or "quartic"; throws ConfigError otherwise.
KernelSpec parse_kernel(std::string_view name);

}  // namespace exceed
