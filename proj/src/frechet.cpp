#include "exceed/frechet.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "exceed/error.hpp"
#include "exceed/exceedance.hpp"
#include "exceed/wasserstein.hpp"

namespace exceed {

namespace {

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::MatrixXd cov_inv;
};

Moments covariate_moments(const CovariateSample& X) {
  const Eigen::Index n = X.n();
  const Eigen::Index p = X.p();
  if (p < 1) throw Error(Errc::InvalidInput, "global regression needs at least one covariate");
  if (n < p + 2)
    throw Error(Errc::InvalidCount, "global regression needs n >= p + 2 subjects");
  if (!X.rows.allFinite()) throw Error(Errc::InvalidInput, "covariates must be finite");

  Moments m;
  m.mean = X.rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = X.rows.rowwise() - m.mean.transpose();
  m.cov = (centered.transpose() * centered) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.cov, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || lmax / lmin > kCovarianceConditionCap) {
    std::ostringstream msg;
    msg << "covariate covariance is singular or ill-conditioned (eigenvalues " << lmin << ", "
        << lmax << ")";
    throw Error(Errc::SingularCovariance, msg.str());
  }
  m.cov_inv = m.cov.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  return m;
}

void check_responses(const ResponseSet& r, Eigen::Index n) {
  if (r.quantiles.rows() != n)
    throw Error(Errc::LengthMismatch, "response count differs from covariate count");
  if (r.quantiles.cols() != r.prob_grid.size())
    throw Error(Errc::GridMismatch, "responses do not match the probability grid");
  if (r.thresholds.size() < 3) throw Error(Errc::InvalidInput, "missing threshold grid");
  if (!(r.domain_length > 0.0)) throw Error(Errc::InvalidInput, "domain length must be positive");
}

}  // namespace

Eigen::VectorXd global_weights(const CovariateSample& X, const Eigen::VectorXd& x) {
  const Moments m = covariate_moments(X);
  if (x.size() != X.p()) throw Error(Errc::LengthMismatch, "query dimension differs from p");
  const Eigen::VectorXd v = m.cov_inv * (x - m.mean);
  return ((X.rows.rowwise() - m.mean.transpose()) * v).array() + 1.0;
}

Eigen::VectorXd local_weights(const Eigen::VectorXd& xs, double x, double b,
                              const KernelSpec& kernel) {
  if (!(b > 0.0)) throw Error(Errc::InvalidInput, "local bandwidth must be positive");
  const Eigen::Index n = xs.size();
  if (n < 1) throw Error(Errc::InvalidCount, "no covariates");

  Eigen::VectorXd kb(n);
  for (Eigen::Index i = 0; i < n; ++i) kb[i] = kernel((xs[i] - x) / b) / b;
  const Eigen::ArrayXd d = xs.array() - x;
  const double nd = static_cast<double>(n);
  const double u0 = kb.sum() / nd;
  const double u1 = (kb.array() * d).sum() / nd;
  const double u2 = (kb.array() * d * d).sum() / nd;
  if (!(u0 > 0.0)) {
    std::ostringstream msg;
    msg << "no covariate within bandwidth " << b << " of x=" << x;
    throw Error(Errc::DegenerateLocalDesign, msg.str());
  }
  if (u2 == 0.0) return kb / u0;  // all weight sits on covariates equal to x

  const double sigma2 = u0 * u2 - u1 * u1;
  if (!(sigma2 > 1e-10 * u0 * u2)) {
    std::ostringstream msg;
    msg << "local design at x=" << x << " is degenerate (sigma0^2=" << sigma2 << ")";
    throw Error(Errc::DegenerateLocalDesign, msg.str());
  }
  return (kb.array() * (u2 - u1 * d) / sigma2).matrix();
}

GlobalFrechetModel GlobalFrechetModel::fit(ResponseSet responses, CovariateSample X) {
  check_responses(responses, X.n());
  Moments m = covariate_moments(X);
  GlobalFrechetModel model;
  model.responses_ = std::move(responses);
  model.X_ = std::move(X);
  model.mean_x_ = std::move(m.mean);
  model.cov_x_ = std::move(m.cov);
  model.cov_inv_ = std::move(m.cov_inv);
  return model;
}

Eigen::VectorXd GlobalFrechetModel::weights(const Eigen::VectorXd& x) const {
  if (x.size() != X_.p()) throw Error(Errc::LengthMismatch, "query dimension differs from p");
  const Eigen::VectorXd v = cov_inv_ * (x - mean_x_);
  return ((X_.rows.rowwise() - mean_x_.transpose()) * v).array() + 1.0;
}

LocalFrechetModel LocalFrechetModel::fit(ResponseSet responses, Eigen::VectorXd xs,
                                         double bandwidth, KernelSpec kernel) {
  check_responses(responses, xs.size());
  if (!(bandwidth > 0.0)) throw Error(Errc::InvalidInput, "local bandwidth must be positive");
  if (!xs.allFinite()) throw Error(Errc::InvalidInput, "covariates must be finite");
  LocalFrechetModel model;
  model.responses_ = std::move(responses);
  model.xs_ = std::move(xs);
  model.bandwidth_ = bandwidth;
  model.kernel_ = kernel;
  return model;
}

Eigen::VectorXd LocalFrechetModel::weights(double x) const {
  return local_weights(xs_, x, bandwidth_, kernel_);
}

ResponseSet build_responses(std::span<const SmoothedTrajectory> trajs, const ThresholdGrid& grid,
                            Eigen::Index prob_grid_size) {
  if (trajs.empty()) throw Error(Errc::InsufficientData, "no trajectories");
  ResponseSet r{ProbabilityGrid(prob_grid_size),
                Eigen::MatrixXd(static_cast<Eigen::Index>(trajs.size()), prob_grid_size), grid,
                trajs.front().domain_length()};
  for (size_t i = 0; i < trajs.size(); ++i) {
    const auto dist = to_distribution(exceedance_function(trajs[i], grid));
    r.quantiles.row(static_cast<Eigen::Index>(i)) =
        quantile_from_distribution(dist, prob_grid_size).q_values.transpose();
  }
  return r;
}

const ResponseSet& responses_of(const FrechetModel& model) {
  return std::visit([](const auto& m) -> const ResponseSet& { return m.responses(); }, model);
}

namespace {

Eigen::VectorXd model_weights(const FrechetModel& model, const Eigen::VectorXd& x) {
  if (const auto* g = std::get_if<GlobalFrechetModel>(&model)) return g->weights(x);
  const auto& local = std::get<LocalFrechetModel>(model);
  if (x.size() != 1) throw Error(Errc::LengthMismatch, "local regression takes a scalar query");
  return local.weights(x[0]);
}

bool outside_support(const FrechetModel& model, const Eigen::VectorXd& x) {
  if (const auto* l = std::get_if<LocalFrechetModel>(&model)) {
    const double b = l->bandwidth();
    return x[0] < l->xs().minCoeff() - b || x[0] > l->xs().maxCoeff() + b;
  }
  return false;
}

}  // namespace

QuantileProfile predict_quantile(const FrechetModel& model, const Eigen::VectorXd& x) {
  const ResponseSet& r = responses_of(model);
  const Eigen::VectorXd w = model_weights(model, x);
  const RawQuantileCandidate mean = weighted_quantile_mean(r.quantiles, w, r.prob_grid);
  return project_to_quantile_space(mean, r.thresholds.min(), r.thresholds.max());
}

ConditionalExceedance predict_conditional(const FrechetModel& model, const Eigen::VectorXd& x,
                                          double density_delta, double eps_tail) {
  ConditionalExceedance out;
  out.extrapolated = outside_support(model, x);
  if (out.extrapolated) {
    std::ostringstream msg;
    msg << "ExtrapolationWarning: query x=" << x[0]
        << " lies outside the covariate range widened by the bandwidth";
    diagnostic(msg.str());
  }
  const ResponseSet& r = responses_of(model);
  out.quantile = predict_quantile(model, x);
  out.distribution = distribution_from_quantile(out.quantile, r.thresholds);
  out.exceedance = to_exceedance(out.distribution);
  out.density = exceedance_density(out.distribution, density_delta);
  out.centrality = force_of_centrality(out.density, out.distribution, eps_tail);
  return out;
}

Eigen::VectorXd threshold_exceedance_function(const FrechetModel& model, double u,
                                              const Eigen::MatrixXd& xs, double domain_length) {
  const ResponseSet& r = responses_of(model);
  if (!(u >= r.thresholds.min() && u <= r.thresholds.max())) {
    std::ostringstream msg;
    msg << "threshold " << u << " outside [" << r.thresholds.min() << ", " << r.thresholds.max()
        << "]";
    throw Error(Errc::ThresholdOutOfRange, msg.str());
  }
  Eigen::VectorXd eta(xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const QuantileProfile q = predict_quantile(model, xs.row(i).transpose());
    eta[i] = domain_length * (1.0 - distribution_at(q, u));
  }
  return eta;
}

double default_local_bandwidth(long n, double x_sd) {
  if (n < 5) throw Error(Errc::InvalidCount, "default local bandwidth needs n >= 5");
  if (!(x_sd > 0.0)) throw Error(Errc::InvalidInput, "covariate sd must be positive");
  return 1.06 * x_sd * std::pow(static_cast<double>(n), -0.2);
}

}  // namespace exceed
