#include "exceed/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "exceed/error.hpp"
#include "exceed/exceedance.hpp"
#include "exceed/frechet.hpp"
#include "exceed/wasserstein.hpp"

namespace exceed {

double TrigTerm::operator()(double t) const {
  const double arg = freq * std::numbers::pi * t;
  return coef * (cosine ? std::cos(arg) : std::sin(arg));
}

double MeanFunction::operator()(double t) const {
  double v = m0;
  for (const auto& term : terms) v += term(t);
  return v;
}

double NoiseModel::sd(double t) const {
  if (kind == Kind::homoscedastic) return nu0;
  return nu0 * std::sqrt(1.5 + std::sin(4.0 * std::numbers::pi * t));
}

Eigen::VectorXd KLSpec::eigenvalues() const {
  Eigen::VectorXd lambda(static_cast<Eigen::Index>(eigen_fns.size()));
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    lambda[k] = c0 * std::pow(static_cast<double>(k + 1), -decay);
  return lambda;
}

void KLSpec::validate() const {
  if (!(c0 > 0.0)) throw Error(Errc::ConfigError, "eigenvalue scale c0 must be positive");
  if (!(decay > 0.0)) throw Error(Errc::ConfigError, "eigenvalue decay must be positive");
  if (!(noise.nu0 >= 0.0)) throw Error(Errc::ConfigError, "noise level must be nonnegative");
}

KLSpec KLSpec::setting_one(double nu0, double m0) {
  const double r2 = std::numbers::sqrt2;
  KLSpec spec;
  spec.mean = {m0, {{2.0, false, 2.0}, {1.0, false, 4.0}, {0.5, true, 6.0}}};
  spec.eigen_fns = {{r2, false, 2.0},  {r2, true, 2.0},  {r2, false, 4.0},  {r2, true, 6.0},
                    {r2, false, 8.0},  {r2, true, 10.0}, {r2, false, 12.0}, {r2, true, 14.0}};
  spec.c0 = 4.0;
  spec.decay = 1.0;
  spec.noise = {NoiseModel::Kind::heteroscedastic, nu0};
  return spec;
}

KLSpec KLSpec::setting_two(double nu0, double m0, bool third_component) {
  const double r2 = std::numbers::sqrt2;
  KLSpec spec;
  spec.mean = {m0, {{2.0, false, 2.0}}};
  spec.eigen_fns = {{r2, false, 2.0}, {r2, true, 2.0}};
  if (third_component) spec.eigen_fns.push_back({r2, false, 4.0});
  spec.c0 = 3.0;
  spec.decay = 1.0;
  spec.noise = {NoiseModel::Kind::homoscedastic, nu0};
  return spec;
}

double softplus(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

TrajectoryGenerator::TrajectoryGenerator(KLSpec spec, Eigen::Index N, Eigen::Index dense_size,
                                         Design design)
    : spec_(std::move(spec)), N_(N), design_(design) {
  spec_.validate();
  if (N < 2) throw Error(Errc::InvalidCount, "need at least 2 observations per subject");
  if (dense_size < 2) throw Error(Errc::InvalidCount, "dense grid needs at least 2 points");
  sd_scores_ = spec_.eigenvalues().cwiseSqrt();
  const auto K = static_cast<Eigen::Index>(spec_.eigen_fns.size());

  const auto fill = [&](const Eigen::VectorXd& t, Eigen::VectorXd& mean, Eigen::MatrixXd& basis) {
    mean.resize(t.size());
    basis.resize(t.size(), K);
    for (Eigen::Index j = 0; j < t.size(); ++j) {
      mean[j] = spec_.mean(t[j]);
      for (Eigen::Index k = 0; k < K; ++k) basis(j, k) = spec_.eigen_fns[static_cast<size_t>(k)](t[j]);
    }
  };
  dense_t_ = equispaced(0.0, 1.0, dense_size);
  fill(dense_t_, dense_mean_, dense_basis_);
  if (design_ == Design::regular) {
    obs_t_ = equispaced(0.0, 1.0, N_);
    fill(obs_t_, obs_mean_, obs_basis_);
    obs_noise_sd_.resize(N_);
    for (Eigen::Index j = 0; j < N_; ++j) obs_noise_sd_[j] = spec_.noise.sd(obs_t_[j]);
  }
}

SimulatedTrajectory TrajectoryGenerator::generate(Rng& rng, double mean_scale,
                                                  const std::string& id) const {
  Eigen::VectorXd scores(sd_scores_.size());
  for (Eigen::Index k = 0; k < scores.size(); ++k) scores[k] = sd_scores_[k] * rng.normal();
  return generate_with_scores(scores, rng, mean_scale, id);
}

SimulatedTrajectory TrajectoryGenerator::generate_with_scores(const Eigen::VectorXd& scores,
                                                              Rng& rng, double mean_scale,
                                                              const std::string& id) const {
  if (scores.size() != sd_scores_.size())
    throw Error(Errc::LengthMismatch, "score count differs from the number of components");

  Eigen::VectorXd t, mean, sd;
  Eigen::MatrixXd basis;
  if (design_ == Design::regular) {
    t = obs_t_;
    mean = obs_mean_;
    basis = obs_basis_;
    sd = obs_noise_sd_;
  } else {
    t.resize(N_);
    for (Eigen::Index j = 0; j < N_; ++j) t[j] = rng.uniform();
    std::sort(t.data(), t.data() + N_);
    const auto K = static_cast<Eigen::Index>(spec_.eigen_fns.size());
    mean.resize(N_);
    basis.resize(N_, K);
    sd.resize(N_);
    for (Eigen::Index j = 0; j < N_; ++j) {
      mean[j] = spec_.mean(t[j]);
      for (Eigen::Index k = 0; k < K; ++k) basis(j, k) = spec_.eigen_fns[static_cast<size_t>(k)](t[j]);
      sd[j] = spec_.noise.sd(t[j]);
    }
  }

  const Eigen::VectorXd latent_obs = mean_scale * mean + basis * scores;
  Eigen::VectorXd z(N_);
  for (Eigen::Index j = 0; j < N_; ++j) {
    const double noise = rng.normal();
    z[j] = softplus(latent_obs[j]) + (sd[j] > 0.0 ? sd[j] * noise : 0.0);
  }

  const Eigen::VectorXd latent_dense = mean_scale * dense_mean_ + dense_basis_ * scores;
  SmoothedTrajectory truth{dense_t_, latent_dense.unaryExpr([](double v) { return softplus(v); })};
  return {RawTrajectory(id, std::move(t), std::move(z), Domain{0.0, 1.0}), std::move(truth),
          scores};
}

SimulatedTrajectory generate_trajectory(const KLSpec& spec, Eigen::Index N, Rng& rng,
                                        Design design, Eigen::Index dense_size) {
  return TrajectoryGenerator(spec, N, dense_size, design).generate(rng);
}

double CovariateLaw::draw(Rng& rng) const {
  if (kind == Kind::uniform) return rng.uniform(a0, b0);
  return truncated_normal(rng, mu, sigma, lo, hi);
}

double CovariateLaw::mean() const {
  if (kind == Kind::uniform) return 0.5 * (a0 + b0);
  return truncated_normal_mean(mu, sigma, lo, hi);
}

void CovariateLaw::validate() const {
  if (kind == Kind::uniform && !(a0 < b0))
    throw Error(Errc::ConfigError, "uniform covariate law needs a0 < b0");
  if (kind == Kind::truncated_normal && (!(lo < hi) || !(sigma > 0.0)))
    throw Error(Errc::ConfigError, "truncated normal law needs lo < hi and sigma > 0");
}

double KappaLaw::mean(double x) const {
  double k = a1 + b1 * x;
  if (kind == Kind::power) k += c1 * std::pow(x, d1);
  return k;
}

void RegressionSimSpec::validate() const {
  covariate.validate();
  base.validate();
  if (!(kappa.noise_sd >= 0.0)) throw Error(Errc::ConfigError, "kappa noise_sd must be >= 0");
}

namespace {

KLSpec regression_base(KLSpec spec) {
  spec.noise.kind = NoiseModel::Kind::homoscedastic;
  return spec;
}

}  // namespace

RegressionSimSpec RegressionSimSpec::global_setting_one() {
  RegressionSimSpec s;
  s.covariate = {CovariateLaw::Kind::uniform, 1.0, 5.0};
  s.kappa = {KappaLaw::Kind::affine, 1.0, 5.0};
  s.base = regression_base(KLSpec::setting_one(1.0, 2.0));
  return s;
}

RegressionSimSpec RegressionSimSpec::local_setting_one() {
  RegressionSimSpec s;
  s.covariate.kind = CovariateLaw::Kind::truncated_normal;
  s.kappa = {KappaLaw::Kind::power, 10.0, 5.0, 2.0, 1.5};
  s.base = regression_base(KLSpec::setting_one(1.0, 4.0));
  return s;
}

RegressionSimSpec RegressionSimSpec::global_setting_two() {
  RegressionSimSpec s;
  s.covariate = {CovariateLaw::Kind::uniform, 1.0, 5.0};
  s.kappa = {KappaLaw::Kind::affine, 1.0, 5.0};
  s.base = regression_base(KLSpec::setting_two(1.0, 2.0));
  return s;
}

RegressionSimSpec RegressionSimSpec::local_setting_two() {
  RegressionSimSpec s;
  s.covariate.kind = CovariateLaw::Kind::truncated_normal;
  s.kappa = {KappaLaw::Kind::power, 10.0, 5.0, -3.0, 2.0};
  s.base = regression_base(KLSpec::setting_two(1.0, 2.0));
  return s;
}

RegressionSample generate_regression_sample(const RegressionSimSpec& spec, long n, long N,
                                            double nu0, Rng& rng, Eigen::Index dense_size,
                                            Design design) {
  spec.validate();
  if (n < 1) throw Error(Errc::InvalidCount, "need at least one subject");
  KLSpec base = spec.base;
  base.noise.nu0 = nu0;
  const TrajectoryGenerator gen(base, N, dense_size, design);

  RegressionSample sample;
  sample.x.resize(n);
  sample.kappa.resize(n);
  sample.subjects.reserve(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double x = spec.covariate.draw(rng);
    const double kappa = spec.kappa.mean(x) + spec.kappa.noise_sd * rng.normal();
    sample.x[i] = x;
    sample.kappa[i] = kappa;
    sample.subjects.push_back(gen.generate(rng, kappa, std::to_string(i)));
  }
  return sample;
}

void SimConfig::validate() const {
  if (n < 1 || N < 2 || B < 1) throw Error(Errc::ConfigError, "counts must be positive (N >= 2)");
  if (time_grid_size < 2 || threshold_grid_size < 3 || prob_grid_size < 3)
    throw Error(Errc::ConfigError, "grid sizes too small");
  if (bandwidth_rule == BandwidthRule::fixed && !(fixed_bandwidth > 0.0))
    throw Error(Errc::ConfigError, "fixed bandwidth must be positive");
  if (local_bandwidth < 0.0) throw Error(Errc::ConfigError, "local bandwidth must be >= 0");
  if (!(query_lo <= query_hi) || query_count < 1)
    throw Error(Errc::ConfigError, "invalid query grid");
  if (threads < 1) throw Error(Errc::ConfigError, "threads must be >= 1");
}

double choose_bandwidth(const SimConfig& cfg, const RawTrajectory& traj, long n) {
  const long N = static_cast<long>(traj.size());
  const double L = traj.domain().length();
  switch (cfg.bandwidth_rule) {
    case BandwidthRule::linear_rate: return linear_rate_bandwidth(N, n, L);
    case BandwidthRule::theory_rate: return default_bandwidth(N, n, L);
    case BandwidthRule::fixed: return cfg.fixed_bandwidth;
    case BandwidthRule::cross_validated: {
      const std::vector<double> candidates =
          cfg.cv_candidates.empty() ? default_cv_candidates(N, L) : cfg.cv_candidates;
      SmoothingConfig base;
      base.kernel = cfg.kernel;
      return cv_bandwidth(traj, candidates, base);
    }
  }
  return cfg.fixed_bandwidth;
}

void parallel_for(long count, int threads, const std::function<void(long)>& fn) {
  const int workers = static_cast<int>(std::min<long>(std::max(threads, 1), std::max(count, 1L)));
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (long i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::vector<SmoothedTrajectory> smooth_sample(const std::vector<SimulatedTrajectory>& sample,
                                              const SimConfig& cfg) {
  std::vector<SmoothedTrajectory> out;
  out.reserve(sample.size());
  const long n = static_cast<long>(sample.size());
  for (const auto& s : sample) {
    SmoothingConfig sc;
    sc.kernel = cfg.kernel;
    sc.bandwidth = choose_bandwidth(cfg, s.observed, n);
    out.push_back(smooth_on_grid(s.observed, cfg.time_grid_size, sc));
  }
  return out;
}

std::vector<SmoothedTrajectory> truths_of(const std::vector<SimulatedTrajectory>& sample) {
  std::vector<SmoothedTrajectory> out;
  out.reserve(sample.size());
  for (const auto& s : sample) out.push_back(s.truth);
  return out;
}

ResponseSet response_set(const std::vector<SmoothedTrajectory>& trajs, const SimConfig& cfg) {
  return build_responses(trajs, default_threshold_grid(trajs, cfg.threshold_grid_size),
                         cfg.prob_grid_size);
}

/// Widens `b` by 1.5 (at most five times) until every query has a
/// nondegenerate local design.
double covering_local_bandwidth(const Eigen::VectorXd& xs, const Eigen::VectorXd& queries, double b,
                                const KernelSpec& kernel) {
  for (int expansion = 0;; ++expansion, b *= 1.5) {
    try {
      for (double x : queries) local_weights(xs, x, b, kernel);
      return b;
    } catch (const Error& e) {
      if (e.code() != Errc::DegenerateLocalDesign || expansion == 5) throw;
    }
  }
}

std::string replicate_context(long b) { return "replicate " + std::to_string(b); }

}  // namespace

MarginalResult run_marginal_rmse(const KLSpec& spec, const SimConfig& cfg) {
  cfg.validate();
  const TrajectoryGenerator gen(spec, cfg.N, cfg.time_grid_size, cfg.design);
  const ProbabilityGrid pgrid(cfg.prob_grid_size);

  // squared distances, replicate x subject
  Eigen::MatrixXd d2(cfg.B, cfg.n);
  parallel_for(cfg.B, cfg.threads, [&](long b) {
    try {
      Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(b));
      std::vector<SimulatedTrajectory> sample;
      sample.reserve(static_cast<size_t>(cfg.n));
      for (long i = 0; i < cfg.n; ++i) sample.push_back(gen.generate(rng, 1.0, std::to_string(i)));
      const ResponseSet est = response_set(smooth_sample(sample, cfg), cfg);
      const ResponseSet truth = response_set(truths_of(sample), cfg);
      for (long i = 0; i < cfg.n; ++i) {
        const QuantileProfile qe{pgrid, est.quantiles.row(i).transpose()};
        const QuantileProfile qt{pgrid, truth.quantiles.row(i).transpose()};
        const double d = wasserstein_distance(qe, qt);
        d2(b, i) = d * d;
      }
    } catch (const Error& e) {
      rethrow_with_context(e, replicate_context(b));
    }
  });

  MarginalResult out;
  out.subject_rmse = d2.colwise().mean().cwiseSqrt().transpose();
  out.mean_rmse = out.subject_rmse.mean();
  out.replicate_mean_dw.resize(static_cast<size_t>(cfg.B));
  for (long b = 0; b < cfg.B; ++b)
    out.replicate_mean_dw[static_cast<size_t>(b)] = d2.row(b).cwiseSqrt().mean();
  return out;
}

RegressionResult run_regression_rmse(ModelKind kind, const RegressionSimSpec& spec,
                                     const SimConfig& cfg, double nu0) {
  cfg.validate();
  spec.validate();
  const Eigen::VectorXd queries = equispaced(cfg.query_lo, cfg.query_hi, cfg.query_count);

  std::vector<double> rmse(static_cast<size_t>(cfg.B));
  parallel_for(cfg.B, cfg.threads, [&](long b) {
    try {
      Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(b));
      const RegressionSample sample =
          generate_regression_sample(spec, cfg.n, cfg.N, nu0, rng, cfg.time_grid_size, cfg.design);
      ResponseSet est = response_set(smooth_sample(sample.subjects, cfg), cfg);
      ResponseSet oracle = response_set(truths_of(sample.subjects), cfg);

      FrechetModel est_model, oracle_model;
      if (kind == ModelKind::global) {
        CovariateSample X{sample.x, {"x"}};
        est_model = GlobalFrechetModel::fit(std::move(est), X);
        oracle_model = GlobalFrechetModel::fit(std::move(oracle), X);
      } else {
        double bw = cfg.local_bandwidth;
        if (bw == 0.0) {
          const double sd = std::sqrt((sample.x.array() - sample.x.mean()).square().mean());
          bw = default_local_bandwidth(cfg.n, sd);
        }
        bw = covering_local_bandwidth(sample.x, queries, bw, cfg.kernel);
        est_model = LocalFrechetModel::fit(std::move(est), sample.x, bw, cfg.kernel);
        oracle_model = LocalFrechetModel::fit(std::move(oracle), sample.x, bw, cfg.kernel);
      }

      double sum = 0.0;
      for (Eigen::Index k = 0; k < queries.size(); ++k) {
        const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, queries[k]);
        const double d = wasserstein_distance(predict_quantile(est_model, x),
                                              predict_quantile(oracle_model, x));
        sum += d * d;
      }
      rmse[static_cast<size_t>(b)] = std::sqrt(sum / static_cast<double>(queries.size()));
    } catch (const Error& e) {
      rethrow_with_context(e, replicate_context(b));
    }
  });

  RegressionResult out;
  out.replicate_rmse = rmse;
  const Eigen::Map<const Eigen::VectorXd> r(rmse.data(), static_cast<Eigen::Index>(rmse.size()));
  out.mean = r.mean();
  out.sd = rmse.size() > 1
               ? std::sqrt((r.array() - out.mean).square().sum() / static_cast<double>(rmse.size() - 1))
               : 0.0;
  return out;
}

}  // namespace exceed
