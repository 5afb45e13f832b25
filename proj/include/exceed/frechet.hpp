#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "exceed/kernels.hpp"
#include "exceed/profiles.hpp"
#include "exceed/smoothing.hpp"

namespace exceed {

/// n covariate rows of dimension p.
struct CovariateSample {
  Eigen::MatrixXd rows;
  std::vector<std::string> names;

  Eigen::Index n() const { return rows.rows(); }
  Eigen::Index p() const { return rows.cols(); }
};

/// Estimated exceedance quantile functions of the n subjects plus the shared
/// threshold grid. The grid's range is the box predictions are projected into.
struct ResponseSet {
  ProbabilityGrid prob_grid;
  Eigen::MatrixXd quantiles;  // n x P
  ThresholdGrid thresholds;
  double domain_length = 1.0;
};

/// Quantile profiles of every trajectory on a shared threshold grid.
ResponseSet build_responses(std::span<const SmoothedTrajectory> trajs, const ThresholdGrid& grid,
                            Eigen::Index prob_grid_size);

inline constexpr double kCovarianceConditionCap = 1e10;

/// s_i(x) = 1 + (X_i - mean)^T Sigma^{-1} (x - mean), Sigma with the 1/n
/// convention.
Eigen::VectorXd global_weights(const CovariateSample& X, const Eigen::VectorXd& x);

/// Local-linear weights K_b(X_i - x) [u2 - u1 (X_i - x)] / (u0 u2 - u1^2).
/// When every covariate with positive kernel weight equals x exactly the
/// local-linear design is undefined and the weights reduce to K_b / u0.
Eigen::VectorXd local_weights(const Eigen::VectorXd& xs, double x, double b,
                              const KernelSpec& kernel);

class GlobalFrechetModel {
 public:
  static GlobalFrechetModel fit(ResponseSet responses, CovariateSample X);

  Eigen::VectorXd weights(const Eigen::VectorXd& x) const;

  const ResponseSet& responses() const { return responses_; }
  const CovariateSample& covariates() const { return X_; }
  const Eigen::VectorXd& mean_x() const { return mean_x_; }
  const Eigen::MatrixXd& cov_x() const { return cov_x_; }

 private:
  ResponseSet responses_;
  CovariateSample X_;
  Eigen::VectorXd mean_x_;
  Eigen::MatrixXd cov_x_;
  Eigen::MatrixXd cov_inv_;
};

class LocalFrechetModel {
 public:
  static LocalFrechetModel fit(ResponseSet responses, Eigen::VectorXd xs, double bandwidth,
                               KernelSpec kernel = {});

  Eigen::VectorXd weights(double x) const;

  const ResponseSet& responses() const { return responses_; }
  const Eigen::VectorXd& xs() const { return xs_; }
  double bandwidth() const { return bandwidth_; }
  const KernelSpec& kernel() const { return kernel_; }

 private:
  ResponseSet responses_;
  Eigen::VectorXd xs_;
  double bandwidth_ = 0.0;
  KernelSpec kernel_;
};

using FrechetModel = std::variant<GlobalFrechetModel, LocalFrechetModel>;

struct ConditionalExceedance {
  QuantileProfile quantile;
  DistributionProfile distribution;
  ExceedanceProfile exceedance;
  DensityProfile density;
  CentralityProfile centrality;
  bool extrapolated = false;
};

const ResponseSet& responses_of(const FrechetModel& model);

/// Projected weighted quantile mean at `x` (local models read x[0]).
QuantileProfile predict_quantile(const FrechetModel& model, const Eigen::VectorXd& x);

ConditionalExceedance predict_conditional(const FrechetModel& model, const Eigen::VectorXd& x,
                                          double density_delta, double eps_tail);

/// eta_u(x) = |T| (1 - F(u, x)) for each query row of `xs`.
Eigen::VectorXd threshold_exceedance_function(const FrechetModel& model, double u,
                                              const Eigen::MatrixXd& xs, double domain_length);

/// 1.06 * x_sd * n^(-1/5)
double default_local_bandwidth(long n, double x_sd);

}  // namespace exceed
