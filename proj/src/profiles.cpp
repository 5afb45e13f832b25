#include "exceed/profiles.hpp"

#include <algorithm>

#include "exceed/error.hpp"
#include "exceed/smoothing.hpp"

namespace exceed {

ThresholdGrid::ThresholdGrid(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() < 3) throw Error(Errc::InvalidCount, "threshold grid needs at least 3 points");
  if (!values_.allFinite()) throw Error(Errc::InvalidInput, "threshold grid must be finite");
  for (Eigen::Index k = 1; k < values_.size(); ++k)
    if (!(values_[k] > values_[k - 1]))
      throw Error(Errc::InvalidInput, "threshold grid must be strictly increasing");
}

ThresholdGrid ThresholdGrid::equispaced(double lo, double hi, Eigen::Index count) {
  if (count < 3) throw Error(Errc::InvalidCount, "threshold grid needs at least 3 points");
  if (!(hi > lo)) throw Error(Errc::InvalidInput, "threshold range is empty");
  return ThresholdGrid(exceed::equispaced(lo, hi, count));
}

ProbabilityGrid::ProbabilityGrid(Eigen::Index count) {
  if (count < 3) throw Error(Errc::InvalidCount, "probability grid needs at least 3 points");
  values_ = exceed::equispaced(0.0, 1.0, count);
}

namespace {

// Linear interpolation on an increasing abscissa; the result never leaves
// [y_k, y_{k+1}] so monotone data stays monotone after rounding.
double interpolate(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double at) {
  const Eigen::Index m = x.size();
  if (at <= x[0]) return y[0];
  if (at >= x[m - 1]) return y[m - 1];
  const auto* it = std::upper_bound(x.data(), x.data() + m, at);
  const Eigen::Index k = (it - x.data()) - 1;
  const double w = (at - x[k]) / (x[k + 1] - x[k]);
  const double v = y[k] + w * (y[k + 1] - y[k]);
  const auto [lo, hi] = std::minmax(y[k], y[k + 1]);
  return std::clamp(v, lo, hi);
}

}  // namespace

double DistributionProfile::operator()(double u) const {
  return interpolate(grid.values(), f_values, u);
}

double QuantileProfile::operator()(double q) const {
  return interpolate(prob_grid.values(), q_values, q);
}

DistributionProfile to_distribution(const ExceedanceProfile& s) {
  return {s.grid, (1.0 - s.s_values.array()).matrix()};
}

ExceedanceProfile to_exceedance(const DistributionProfile& f) {
  return {f.grid, (1.0 - f.f_values.array()).matrix()};
}

QuantileProfile resample(const QuantileProfile& q, const ProbabilityGrid& grid) {
  if (q.prob_grid == grid) return q;
  QuantileProfile out{grid, Eigen::VectorXd(grid.size())};
  for (Eigen::Index k = 0; k < grid.size(); ++k) out.q_values[k] = q(grid[k]);
  return out;
}

}  // namespace exceed
