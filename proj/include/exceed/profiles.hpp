#pragma once

#include <Eigen/Core>

namespace exceed {

/// Strictly increasing thresholds u_1 < ... < u_G, G >= 3.
class ThresholdGrid {
 public:
  ThresholdGrid() = default;
  explicit ThresholdGrid(Eigen::VectorXd values);

  static ThresholdGrid equispaced(double lo, double hi, Eigen::Index count);

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index k) const { return values_[k]; }
  double min() const { return values_[0]; }
  double max() const { return values_[values_.size() - 1]; }
  double range() const { return max() - min(); }

  friend bool operator==(const ThresholdGrid& a, const ThresholdGrid& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Eigen::VectorXd values_;
};

/// Equispaced probabilities 0 = q_1 < ... < q_P = 1, P >= 3.
class ProbabilityGrid {
 public:
  ProbabilityGrid() : ProbabilityGrid(201) {}
  explicit ProbabilityGrid(Eigen::Index count);

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }
  double operator[](Eigen::Index k) const { return values_[k]; }
  double step() const { return 1.0 / static_cast<double>(values_.size() - 1); }

  friend bool operator==(const ProbabilityGrid& a, const ProbabilityGrid& b) {
    return a.size() == b.size();
  }

 private:
  Eigen::VectorXd values_;
};

struct ExceedanceProfile {
  ThresholdGrid grid;
  Eigen::VectorXd s_values;
};

struct DistributionProfile {
  ThresholdGrid grid;
  Eigen::VectorXd f_values;

  /// F at an arbitrary threshold, by linear interpolation, clamped to the
  /// grid ends. Monotone in `u` whenever f_values is.
  double operator()(double u) const;
};

struct QuantileProfile {
  ProbabilityGrid prob_grid;
  Eigen::VectorXd q_values;

  /// Q at an arbitrary probability by linear interpolation.
  double operator()(double q) const;
};

struct DensityProfile {
  ThresholdGrid grid;
  Eigen::VectorXd d_values;
  double delta = 0.0;
};

struct CentralityProfile {
  Eigen::VectorXd grid;
  Eigen::VectorXd h_values;
  double eps_tail = 0.0;
};

DistributionProfile to_distribution(const ExceedanceProfile& s);
ExceedanceProfile to_exceedance(const DistributionProfile& f);

/// Resamples a quantile profile onto another probability grid.
QuantileProfile resample(const QuantileProfile& q, const ProbabilityGrid& grid);

}  // namespace exceed
