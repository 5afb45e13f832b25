#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "exceed/kernels.hpp"
#include "exceed/rng.hpp"
#include "exceed/smoothing.hpp"

namespace exceed {

/// coef * sin(freq * pi * t) or coef * cos(freq * pi * t)
struct TrigTerm {
  double coef = 1.0;
  bool cosine = false;
  double freq = 2.0;

  double operator()(double t) const;
};

struct MeanFunction {
  double m0 = 0.0;
  std::vector<TrigTerm> terms;

  double operator()(double t) const;
};

struct NoiseModel {
  enum class Kind { homoscedastic, heteroscedastic };
  Kind kind = Kind::homoscedastic;
  double nu0 = 0.0;

  /// Heteroscedastic noise has variance nu0^2 (1.5 + sin(4 pi t)).
  double sd(double t) const;
};

/// Karhunen-Loeve generator V(t) = mu(t) + sum_k xi_k phi_k(t), with
/// xi_k ~ N(0, c0 k^-a), observed as softplus(V) plus noise on [0, 1].
struct KLSpec {
  MeanFunction mean;
  std::vector<TrigTerm> eigen_fns;
  double c0 = 1.0;
  double decay = 1.0;
  NoiseModel noise;

  Eigen::VectorXd eigenvalues() const;
  void validate() const;

  /// Eight trigonometric components, heteroscedastic noise, m0 = 20.
  static KLSpec setting_one(double nu0, double m0 = 20.0);
  /// Two components (optionally a third, sqrt2 sin(4 pi t)), m0 = 15.
  static KLSpec setting_two(double nu0, double m0 = 15.0, bool third_component = false);
};

enum class Design { regular, random };

struct SimulatedTrajectory {
  RawTrajectory observed;
  SmoothedTrajectory truth;  // noiseless Y on the dense grid
  Eigen::VectorXd scores;
};

double softplus(double v);

/// Caches basis evaluations so repeated draws from one spec stay cheap.
/// Draw order per trajectory: K scores, then (random design) N sorted
/// uniform times, then N noise values.
class TrajectoryGenerator {
 public:
  TrajectoryGenerator(KLSpec spec, Eigen::Index N, Eigen::Index dense_size = 1001,
                      Design design = Design::regular);

  SimulatedTrajectory generate(Rng& rng, double mean_scale = 1.0,
                               const std::string& id = "0") const;
  /// Same with the scores supplied instead of drawn.
  SimulatedTrajectory generate_with_scores(const Eigen::VectorXd& scores, Rng& rng,
                                           double mean_scale = 1.0,
                                           const std::string& id = "0") const;

  const KLSpec& spec() const { return spec_; }

 private:
  KLSpec spec_;
  Eigen::Index N_;
  Design design_;
  Eigen::VectorXd sd_scores_;
  Eigen::VectorXd dense_t_, dense_mean_;
  Eigen::MatrixXd dense_basis_;
  Eigen::VectorXd obs_t_, obs_mean_, obs_noise_sd_;
  Eigen::MatrixXd obs_basis_;
};

SimulatedTrajectory generate_trajectory(const KLSpec& spec, Eigen::Index N, Rng& rng,
                                        Design design = Design::regular,
                                        Eigen::Index dense_size = 1001);

struct CovariateLaw {
  enum class Kind { uniform, truncated_normal };
  Kind kind = Kind::uniform;
  double a0 = 1.0, b0 = 5.0;                     // uniform
  double mu = 3.0, sigma = 0.5, lo = 1.0, hi = 5.0;  // truncated normal

  double draw(Rng& rng) const;
  double mean() const;
  void validate() const;
};

/// kappa(x) = a1 + b1 x + eps (affine) or a1 + b1 x + c1 x^d1 + eps (power),
/// eps ~ N(0, noise_sd^2) drawn per subject.
struct KappaLaw {
  enum class Kind { affine, power };
  Kind kind = Kind::affine;
  double a1 = 1.0, b1 = 5.0, c1 = 0.0, d1 = 1.5;
  double noise_sd = 0.70710678118654752;

  double mean(double x) const;
};

struct RegressionSimSpec {
  CovariateLaw covariate;
  KappaLaw kappa;
  KLSpec base;  // mean scaled by kappa(x); homoscedastic noise

  void validate() const;

  static RegressionSimSpec global_setting_one();
  static RegressionSimSpec local_setting_one();
  static RegressionSimSpec global_setting_two();
  static RegressionSimSpec local_setting_two();
};

struct RegressionSample {
  Eigen::VectorXd x;
  Eigen::VectorXd kappa;
  std::vector<SimulatedTrajectory> subjects;
};

/// Draw order: for each subject, covariate, kappa noise, then trajectory.
RegressionSample generate_regression_sample(const RegressionSimSpec& spec, long n, long N,
                                            double nu0, Rng& rng,
                                            Eigen::Index dense_size = 1001,
                                            Design design = Design::regular);

enum class BandwidthRule { linear_rate, theory_rate, fixed, cross_validated };

struct SimConfig {
  long n = 200;
  long N = 500;
  long B = 100;
  std::uint64_t seed = 1;
  Eigen::Index time_grid_size = 1001;
  Eigen::Index threshold_grid_size = 201;
  Eigen::Index prob_grid_size = 201;
  BandwidthRule bandwidth_rule = BandwidthRule::linear_rate;
  double fixed_bandwidth = 0.05;
  std::vector<double> cv_candidates;  // empty: 10 log-spaced values in [2/N, 0.5]
  KernelSpec kernel{};
  Design design = Design::regular;
  double local_bandwidth = 0.0;  // 0: default_local_bandwidth on the sampled X
  double query_lo = 2.0;
  double query_hi = 4.0;
  Eigen::Index query_count = 50;
  int threads = 1;

  void validate() const;
};

/// Smoothing bandwidth chosen by `cfg.bandwidth_rule` for one trajectory.
double choose_bandwidth(const SimConfig& cfg, const RawTrajectory& traj, long n);

struct MarginalResult {
  Eigen::VectorXd subject_rmse;           // RMSE_i over replicates
  double mean_rmse = 0.0;                 // mean over subjects
  std::vector<double> replicate_mean_dw;  // per replicate, mean_i d_W
};

MarginalResult run_marginal_rmse(const KLSpec& spec, const SimConfig& cfg);

enum class ModelKind { global, local };

struct RegressionResult {
  double mean = 0.0;
  double sd = 0.0;
  std::vector<double> replicate_rmse;
};

RegressionResult run_regression_rmse(ModelKind kind, const RegressionSimSpec& spec,
                                     const SimConfig& cfg, double nu0);

/// Runs fn(0..count-1) on `threads` workers; results must be written by index.
void parallel_for(long count, int threads, const std::function<void(long)>& fn);

}  // namespace exceed
