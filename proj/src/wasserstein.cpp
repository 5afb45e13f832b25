#include "exceed/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "exceed/error.hpp"

namespace exceed {

double wasserstein_distance(const QuantileProfile& q1, const QuantileProfile& q2,
                            bool allow_resample) {
  if (q1.q_values.size() != q1.prob_grid.size() || q2.q_values.size() != q2.prob_grid.size())
    throw Error(Errc::LengthMismatch, "quantile values do not match their grid");
  if (q1.prob_grid == q2.prob_grid) {
    const Eigen::VectorXd diff2 = (q1.q_values - q2.q_values).array().square().matrix();
    return std::sqrt(std::max(0.0, trapezoid(diff2, q1.prob_grid.step())));
  }
  if (!allow_resample) throw Error(Errc::GridMismatch, "quantile profiles use different grids");
  const ProbabilityGrid common = q1.prob_grid.size() >= q2.prob_grid.size() ? q1.prob_grid
                                                                            : q2.prob_grid;
  return wasserstein_distance(resample(q1, common), resample(q2, common), false);
}

RawQuantileCandidate weighted_quantile_mean(std::span<const QuantileProfile> profiles,
                                            std::span<const double> weights) {
  if (profiles.size() != weights.size())
    throw Error(Errc::LengthMismatch, "profile and weight counts differ");
  if (profiles.empty()) throw Error(Errc::InvalidCount, "no profiles to average");
  const ProbabilityGrid grid = profiles.front().prob_grid;
  Eigen::MatrixXd responses(static_cast<Eigen::Index>(profiles.size()), grid.size());
  for (size_t i = 0; i < profiles.size(); ++i) {
    if (!(profiles[i].prob_grid == grid))
      throw Error(Errc::GridMismatch, "profiles use different probability grids");
    responses.row(static_cast<Eigen::Index>(i)) = profiles[i].q_values.transpose();
  }
  const Eigen::VectorXd w =
      Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return weighted_quantile_mean(responses, w, grid);
}

RawQuantileCandidate weighted_quantile_mean(const Eigen::MatrixXd& responses,
                                            const Eigen::VectorXd& weights,
                                            const ProbabilityGrid& grid) {
  if (responses.rows() != weights.size())
    throw Error(Errc::LengthMismatch, "profile and weight counts differ");
  if (responses.cols() != grid.size())
    throw Error(Errc::GridMismatch, "responses do not match the probability grid");
  if (responses.rows() == 0) throw Error(Errc::InvalidCount, "no profiles to average");
  const double n = static_cast<double>(responses.rows());
  return {grid, (responses.transpose() * weights) / n};
}

double monotonicity_violation(const Eigen::VectorXd& values) {
  double running_max = -std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    running_max = std::max(running_max, values[k]);
    worst = std::max(worst, running_max - values[k]);
  }
  return worst;
}

QuantileProfile project_to_quantile_space(const RawQuantileCandidate& candidate, double lo,
                                          double hi) {
  if (!(lo < hi)) throw Error(Errc::InvalidInput, "projection box is empty");
  if (!candidate.values.allFinite())
    throw Error(Errc::InvalidInput, "candidate quantile values must be finite");
  if (candidate.values.size() != candidate.prob_grid.size())
    throw Error(Errc::LengthMismatch, "candidate values do not match the probability grid");

  const double violation = monotonicity_violation(candidate.values);
  if (violation > 0.1 * (hi - lo)) {
    std::ostringstream msg;
    msg << "weighted quantile mean violates monotonicity by " << violation
        << " (box range " << hi - lo << ") before projection";
    diagnostic(msg.str());
  }
  QuantileProfile out{candidate.prob_grid, pava(candidate.values)};
  out.q_values = out.q_values.cwiseMax(lo).cwiseMin(hi);
  return out;
}

}  // namespace exceed
