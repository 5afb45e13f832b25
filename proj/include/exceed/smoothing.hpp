#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "exceed/kernels.hpp"

namespace exceed {

struct Domain {
  double start = 0.0;
  double end = 1.0;

  double length() const { return end - start; }
  bool contains(double t) const { return t >= start && t <= end; }
};

/// One subject's noisy discrete observations (t_j, z_j), sorted by time.
class RawTrajectory {
 public:
  /// Throws InvalidInput unless times are sorted, inside `domain`, finite,
  /// and contain at least two distinct values.
  RawTrajectory(std::string subject_id, Eigen::VectorXd times, Eigen::VectorXd values,
                Domain domain);

  const std::string& subject_id() const { return subject_id_; }
  const Eigen::VectorXd& times() const { return times_; }
  const Eigen::VectorXd& values() const { return values_; }
  const Domain& domain() const { return domain_; }
  Eigen::Index size() const { return times_.size(); }

 private:
  std::string subject_id_;
  Eigen::VectorXd times_;
  Eigen::VectorXd values_;
  Domain domain_;
};

struct SmoothingConfig {
  double bandwidth = 0.1;
  KernelSpec kernel{};
  /// Lower bound on the kernel-weighted variance of the offsets (t_j - t)/h.
  /// Below it the local design counts as singular.
  double ridge_epsilon = 1e-10;
  int max_bandwidth_expansions = 5;

  void validate() const;
};

/// Grid values of a reconstructed trajectory, read between grid points by
/// linear interpolation.
struct SmoothedTrajectory {
  Eigen::VectorXd grid;
  Eigen::VectorXd values;

  double operator()(double t) const;
  double domain_length() const { return grid[grid.size() - 1] - grid[0]; }
};

Eigen::VectorXd equispaced(double lo, double hi, Eigen::Index count);

/// Local-linear estimate of the trajectory at `t`: the intercept of the
/// kernel-weighted least-squares line through the observations in [t-h, t+h].
/// The window grows by a factor 1.5 (at most `max_bandwidth_expansions`
/// times) while it holds fewer than two distinct times or its design is
/// singular.
double local_linear_fit(const RawTrajectory& traj, double t, const SmoothingConfig& cfg);

SmoothedTrajectory smooth_on_grid(const RawTrajectory& traj, Eigen::Index grid_size,
                                  const SmoothingConfig& cfg);

/// domain_length * (log(N n) / N)^(1/5)
double default_bandwidth(long N, long n, double domain_length);

/// domain_length * log(N n) / N. Much narrower than the default; this is the
/// rule the simulation harness uses to match the published RMSE tables.
double linear_rate_bandwidth(long N, long n, double domain_length);

/// Ten log-spaced bandwidths from 2L/N to L/2.
std::vector<double> default_cv_candidates(long N, double domain_length);

/// Candidate minimizing the leave-one-out squared prediction error, ties
/// going to the larger bandwidth. Candidates whose leave-one-out fits fail
/// are skipped.
double cv_bandwidth(const RawTrajectory& traj, std::span<const double> candidates,
                    const SmoothingConfig& cfg_base);

namespace detail {
/// Local-linear fit ignoring observation `skip` (pass -1 to use all).
double local_linear_fit(const RawTrajectory& traj, double t, const SmoothingConfig& cfg,
                        Eigen::Index skip);
}  // namespace detail

}  // namespace exceed
