#pragma once

#include <Eigen/Core>
#include <span>

#include "exceed/profiles.hpp"
#include "exceed/smoothing.hpp"

namespace exceed {

/// S(u) = |{t : Y(t) >= u}| / |T| for the piecewise-linear interpolant of
/// `traj`, solved per segment in closed form.
ExceedanceProfile exceedance_function(const SmoothedTrajectory& traj, const ThresholdGrid& grid);

/// Q(q) = inf{u : F(u) >= q}, with F linear between grid values.
QuantileProfile quantile_from_distribution(const DistributionProfile& dist,
                                           Eigen::Index prob_grid_size);

/// Difference-quotient density with half-width `delta`; one-sided quotients
/// within `delta` of either end of the grid.
DensityProfile exceedance_density(const DistributionProfile& dist, double delta);

/// range * (log(N n) / N)^(1/5), capped at range / 4.
double default_delta(long N, long n, double range);

/// h = f / (1 - F) on the thresholds where 1 - F >= eps_tail.
CentralityProfile force_of_centrality(const DensityProfile& density,
                                      const DistributionProfile& dist, double eps_tail);

/// F(u) = inf{q : Q(q) >= u}: the share of time spent strictly below u.
double distribution_at(const QuantileProfile& quantile, double u);

/// Inverts a quantile profile onto a threshold grid.
DistributionProfile distribution_from_quantile(const QuantileProfile& quantile,
                                               const ThresholdGrid& grid);

/// Smallest and largest value over a sample of reconstructed trajectories.
std::pair<double, double> value_range(std::span<const SmoothedTrajectory> sample);

/// Shared equispaced grid over the sample's value range. A degenerate range
/// (all trajectories constant at one level) is widened by 0.5 on each side.
ThresholdGrid default_threshold_grid(std::span<const SmoothedTrajectory> sample,
                                     Eigen::Index size = 201);

inline constexpr double kDefaultEpsTail = 0.05;

/// Every profile derived from one trajectory.
struct ExceedanceChain {
  ExceedanceProfile exceedance;
  DistributionProfile distribution;
  QuantileProfile quantile;
  DensityProfile density;
  CentralityProfile centrality;
};

ExceedanceChain exceedance_chain(const SmoothedTrajectory& traj, const ThresholdGrid& grid,
                                 Eigen::Index prob_grid_size, double delta, double eps_tail);

}  // namespace exceed
