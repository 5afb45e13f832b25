#include "exceed/exceedance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "exceed/error.hpp"

namespace exceed {

ExceedanceProfile exceedance_function(const SmoothedTrajectory& traj, const ThresholdGrid& grid) {
  const Eigen::Index m = traj.grid.size();
  if (m < 2 || traj.values.size() != m)
    throw Error(Errc::EmptyTrajectory, "trajectory needs at least two grid points");
  const double length = traj.domain_length();
  if (!(length > 0.0)) throw Error(Errc::EmptyTrajectory, "trajectory domain has zero length");

  const Eigen::Index g = grid.size();
  const double* u = grid.values().data();
  // full[k]: difference array of whole-segment contributions; partial[k]:
  // contributions of segments crossing u_k.
  Eigen::VectorXd full = Eigen::VectorXd::Zero(g + 1);
  Eigen::VectorXd partial = Eigen::VectorXd::Zero(g);

  for (Eigen::Index j = 0; j + 1 < m; ++j) {
    const double dt = traj.grid[j + 1] - traj.grid[j];
    const double lo = std::min(traj.values[j], traj.values[j + 1]);
    const double hi = std::max(traj.values[j], traj.values[j + 1]);
    // thresholds u <= lo see the whole segment
    const Eigen::Index below = std::upper_bound(u, u + g, lo) - u;
    full[0] += dt;
    full[below] -= dt;
    if (hi > lo) {
      const Eigen::Index crossing_end = std::lower_bound(u, u + g, hi) - u;
      for (Eigen::Index k = below; k < crossing_end; ++k)
        partial[k] += dt * (hi - u[k]) / (hi - lo);
    }
  }

  const double ymin = traj.values.minCoeff();
  const double ymax = traj.values.maxCoeff();
  ExceedanceProfile out{grid, Eigen::VectorXd(g)};
  double running = 0.0;
  for (Eigen::Index k = 0; k < g; ++k) {
    running += full[k];
    double s = (running + partial[k]) / length;
    if (u[k] <= ymin) s = 1.0;
    if (u[k] > ymax) s = 0.0;
    out.s_values[k] = std::clamp(s, 0.0, 1.0);
  }
  // Rounding in the running sum can leave ulp-sized upticks.
  for (Eigen::Index k = 1; k < g; ++k)
    out.s_values[k] = std::min(out.s_values[k], out.s_values[k - 1]);
  return out;
}

QuantileProfile quantile_from_distribution(const DistributionProfile& dist,
                                           Eigen::Index prob_grid_size) {
  const auto& f = dist.f_values;
  const auto& u = dist.grid.values();
  const Eigen::Index g = u.size();
  if (f.size() != g) throw Error(Errc::LengthMismatch, "distribution values do not match grid");
  for (Eigen::Index k = 0; k < g; ++k) {
    if (!(f[k] >= 0.0 && f[k] <= 1.0))
      throw Error(Errc::InvalidInput, "distribution values must lie in [0, 1]");
    if (k > 0 && f[k] < f[k - 1])
      throw Error(Errc::InvalidInput, "distribution values must be nondecreasing");
  }

  QuantileProfile out{ProbabilityGrid(prob_grid_size), Eigen::VectorXd(prob_grid_size)};
  const double* fb = f.data();
  for (Eigen::Index i = 0; i < prob_grid_size; ++i) {
    const double q = out.prob_grid[i];
    const Eigen::Index k = std::lower_bound(fb, fb + g, q) - fb;
    double value;
    if (k == g) {
      value = u[g - 1];
    } else if (k == 0 || f[k] == q) {
      value = u[k];
    } else {
      const double w = (q - f[k - 1]) / (f[k] - f[k - 1]);
      value = std::min(u[k - 1] + w * (u[k] - u[k - 1]), u[k]);
    }
    out.q_values[i] = i > 0 ? std::max(value, out.q_values[i - 1]) : value;
  }
  return out;
}

DensityProfile exceedance_density(const DistributionProfile& dist, double delta) {
  const auto& u = dist.grid.values();
  const double umin = dist.grid.min();
  const double umax = dist.grid.max();
  if (!(delta > 0.0) || !(delta < (umax - umin) / 2.0))
    throw Error(Errc::DeltaOutOfRange, "delta must lie in (0, range/2)");

  DensityProfile out{dist.grid, Eigen::VectorXd(u.size()), delta};
  const double f_lo = dist(umin);
  const double f_hi = dist(umax);
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    const double x = u[k];
    if (x < umin + delta)
      out.d_values[k] = (dist(x + delta) - f_lo) / ((x - umin) + delta);
    else if (x > umax - delta)
      out.d_values[k] = (f_hi - dist(x - delta)) / ((umax - x) + delta);
    else
      out.d_values[k] = (dist(x + delta) - dist(x - delta)) / (2.0 * delta);
  }
  return out;
}

double default_delta(long N, long n, double range) {
  if (N < 2 || n < 1) throw Error(Errc::InvalidCount, "default_delta needs N >= 2, n >= 1");
  if (!(range > 0.0)) throw Error(Errc::InvalidInput, "threshold range must be positive");
  const double Nd = static_cast<double>(N);
  const double raw = range * std::pow(std::log(Nd * static_cast<double>(n)) / Nd, 0.2);
  return std::min(raw, range / 4.0);
}

CentralityProfile force_of_centrality(const DensityProfile& density,
                                      const DistributionProfile& dist, double eps_tail) {
  if (!(density.grid == dist.grid))
    throw Error(Errc::GridMismatch, "density and distribution use different threshold grids");
  if (!(eps_tail > 0.0 && eps_tail < 1.0))
    throw Error(Errc::InvalidInput, "eps_tail must lie in (0, 1)");

  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < dist.grid.size(); ++k)
    if (1.0 - dist.f_values[k] >= eps_tail) kept.push_back(k);
  if (kept.empty())
    throw Error(Errc::EmptyCentralityDomain, "no threshold leaves exceedance above eps_tail");

  CentralityProfile out;
  out.eps_tail = eps_tail;
  out.grid.resize(static_cast<Eigen::Index>(kept.size()));
  out.h_values.resize(out.grid.size());
  for (Eigen::Index i = 0; i < out.grid.size(); ++i) {
    const Eigen::Index k = kept[static_cast<size_t>(i)];
    out.grid[i] = dist.grid[k];
    out.h_values[i] = density.d_values[k] / (1.0 - dist.f_values[k]);
  }
  return out;
}

double distribution_at(const QuantileProfile& quantile, double u) {
  const auto& qv = quantile.q_values;
  const Eigen::Index p = qv.size();
  const double* b = qv.data();
  const Eigen::Index k = std::lower_bound(b, b + p, u) - b;
  if (k == 0) return 0.0;
  if (k == p) return 1.0;
  const double q0 = quantile.prob_grid[k - 1];
  const double q1 = quantile.prob_grid[k];
  const double w = (u - qv[k - 1]) / (qv[k] - qv[k - 1]);
  return std::clamp(q0 + w * (q1 - q0), q0, q1);
}

DistributionProfile distribution_from_quantile(const QuantileProfile& quantile,
                                               const ThresholdGrid& grid) {
  DistributionProfile out{grid, Eigen::VectorXd(grid.size())};
  for (Eigen::Index k = 0; k < grid.size(); ++k) out.f_values[k] = distribution_at(quantile, grid[k]);
  return out;
}

std::pair<double, double> value_range(std::span<const SmoothedTrajectory> sample) {
  if (sample.empty()) throw Error(Errc::EmptyTrajectory, "empty sample");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& traj : sample) {
    if (traj.values.size() == 0) throw Error(Errc::EmptyTrajectory, "empty trajectory");
    lo = std::min(lo, traj.values.minCoeff());
    hi = std::max(hi, traj.values.maxCoeff());
  }
  return {lo, hi};
}

ThresholdGrid default_threshold_grid(std::span<const SmoothedTrajectory> sample,
                                     Eigen::Index size) {
  auto [lo, hi] = value_range(sample);
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return ThresholdGrid::equispaced(lo, hi, size);
}

ExceedanceChain exceedance_chain(const SmoothedTrajectory& traj, const ThresholdGrid& grid,
                                 Eigen::Index prob_grid_size, double delta, double eps_tail) {
  ExceedanceChain chain;
  chain.exceedance = exceedance_function(traj, grid);
  chain.distribution = to_distribution(chain.exceedance);
  chain.quantile = quantile_from_distribution(chain.distribution, prob_grid_size);
  chain.density = exceedance_density(chain.distribution, delta);
  chain.centrality = force_of_centrality(chain.density, chain.distribution, eps_tail);
  return chain;
}

}  // namespace exceed
