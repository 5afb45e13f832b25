#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "exceed/exceedance.hpp"
#include "exceed/frechet.hpp"
#include "exceed/io.hpp"
#include "exceed/simulation.hpp"
#include "exceed/smoothing.hpp"

namespace exceed::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Per-subject bandwidth choice for the smoothing step.
struct BandwidthChoice {
  enum class Kind { fixed, theory_rate, linear_rate, cross_validated };
  Kind kind = Kind::theory_rate;
  double value = 0.0;
  std::vector<double> candidates;  // cross_validated; empty: log-spaced default

  double resolve(const RawTrajectory& traj, long n, const SmoothingConfig& base) const;
};

struct SmoothOptions {
  fs::path input;
  std::optional<Domain> domain;
  Eigen::Index grid_size = 201;
  BandwidthChoice bandwidth;
  SmoothingConfig smoothing;
  int threads = 1;
};

struct ExceedOptions {
  SmoothOptions smooth;
  Eigen::Index threshold_grid_size = 201;
  std::optional<std::pair<double, double>> threshold_range;
  Eigen::Index prob_grid_size = 201;
  std::optional<double> delta;
  double eps_tail = kDefaultEpsTail;
};

struct FrechetOptions {
  ExceedOptions exceed;
  fs::path covariates;
  std::vector<std::string> covariate_columns;
  std::set<std::string> categorical;
  std::string model_kind = "global";
  double local_bandwidth = 0.0;  // 0: rule-of-thumb from the covariate spread
  KernelSpec local_kernel;
  std::optional<fs::path> model;  // predict from a saved model instead of fitting
  json queries;                   // null: default query grid
  std::vector<double> eta_thresholds;
};

struct SimulateOptions {
  std::string table = "marginal";
  int setting = 1;
  std::vector<long> n;
  std::vector<long> N;
  std::vector<double> nu0;
  std::vector<std::string> models;
  bool third_component = false;
  std::optional<double> c1;
  std::optional<double> d1;
  SimConfig sim;
};

/// Parsers reject unknown keys and validate every value before any work.
SmoothOptions parse_smooth_options(const json& config);
ExceedOptions parse_exceed_options(const json& config);
FrechetOptions parse_frechet_options(const json& config);
SimulateOptions parse_simulate_options(const json& config);

/// In-process equivalents of the commands; the CLI writes exactly these.
std::vector<SmoothedTrajectory> smooth_all(const std::vector<RawTrajectory>& trajs,
                                           const SmoothOptions& opts);
ThresholdGrid threshold_grid_for(const std::vector<SmoothedTrajectory>& smoothed,
                                 const ExceedOptions& opts);
double delta_for(const std::vector<RawTrajectory>& trajs, const ThresholdGrid& grid,
                 const ExceedOptions& opts);

struct Query {
  std::string label;
  Eigen::VectorXd x;
};
std::vector<Query> resolve_queries(const io::ModelArtifact& artifact, const json& queries);
io::ModelArtifact fit_model(const std::vector<RawTrajectory>& trajs, const FrechetOptions& opts);

/// Each returns the files it wrote, in order.
std::vector<fs::path> cmd_smooth(const json& config, const fs::path& out_dir);
std::vector<fs::path> cmd_exceed(const json& config, const fs::path& out_dir);
std::vector<fs::path> cmd_frechet(const json& config, const fs::path& out_dir);
std::vector<fs::path> cmd_simulate(const json& config, const fs::path& out_dir);

/// Reads a JSON config file (object at top level).
json read_config(const fs::path& path);

}  // namespace exceed::cli
