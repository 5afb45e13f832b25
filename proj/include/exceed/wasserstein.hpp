#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "exceed/profiles.hpp"

namespace exceed {

/// Unconstrained weighted mean of quantile profiles; may be non-monotone.
struct RawQuantileCandidate {
  ProbabilityGrid prob_grid;
  Eigen::VectorXd values;
};

/// Trapezoid rule on an equispaced grid of step `step`.
template <typename Derived>
typename Derived::Scalar trapezoid(const Eigen::MatrixBase<Derived>& y,
                                   typename Derived::Scalar step) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = y.size();
  if (n < 2) return Scalar(0);
  return step * (y.sum() - Scalar(0.5) * (y(0) + y(n - 1)));
}

/// Least-squares nondecreasing fit (pool adjacent violators, unit weights).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> pava(
    const Eigen::MatrixBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = y.size();
  // Blocks are kept on a stack as (sum, count); merging restores the
  // nondecreasing order of block means.
  std::vector<Scalar> sums;
  std::vector<Eigen::Index> counts;
  sums.reserve(static_cast<size_t>(n));
  counts.reserve(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar s = y(i);
    Eigen::Index c = 1;
    while (!sums.empty() &&
           sums.back() * static_cast<Scalar>(c) > s * static_cast<Scalar>(counts.back())) {
      s += sums.back();
      c += counts.back();
      sums.pop_back();
      counts.pop_back();
    }
    sums.push_back(s);
    counts.push_back(c);
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  Eigen::Index pos = 0;
  for (size_t b = 0; b < sums.size(); ++b) {
    const Scalar mean = sums[b] / static_cast<Scalar>(counts[b]);
    out.segment(pos, counts[b]).setConstant(mean);
    pos += counts[b];
  }
  return out;
}

/// sqrt of the trapezoid approximation of the integral of (Q1 - Q2)^2 over
/// [0, 1]. Profiles on different grids are resampled onto the finer one
/// unless `allow_resample` is false, in which case GridMismatch is thrown.
double wasserstein_distance(const QuantileProfile& q1, const QuantileProfile& q2,
                            bool allow_resample = true);

/// (1/n) sum_i w_i Q_i
RawQuantileCandidate weighted_quantile_mean(std::span<const QuantileProfile> profiles,
                                            std::span<const double> weights);

/// Same with the profiles stacked as rows of `responses`.
RawQuantileCandidate weighted_quantile_mean(const Eigen::MatrixXd& responses,
                                            const Eigen::VectorXd& weights,
                                            const ProbabilityGrid& grid);

/// Nearest nondecreasing sequence inside [lo, hi] in the equal-weight
/// discrete L2 sense: PAVA followed by clipping.
QuantileProfile project_to_quantile_space(const RawQuantileCandidate& candidate, double lo,
                                          double hi);

/// Largest drop max_{i<j} (y_i - y_j), zero for nondecreasing input.
double monotonicity_violation(const Eigen::VectorXd& values);

}  // namespace exceed
