#include "exceed/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "exceed/csv.hpp"
#include "exceed/error.hpp"
#include "exceed/wasserstein.hpp"

namespace exceed::cli {

namespace {

using Keys = std::vector<std::string_view>;

template <typename T>
T get(const json& config, const std::string& key, T fallback) {
  const auto it = config.find(key);
  if (it == config.end() || it->is_null()) return fallback;
  try {
    if constexpr (std::is_arithmetic_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number()) throw Error(Errc::ConfigError, "");
      if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw Error(Errc::ConfigError, "");
        if constexpr (std::is_unsigned_v<T>)
          if (!it->is_number_unsigned() && it->get<long long>() < 0) throw Error(Errc::ConfigError, "");
      }
    }
    return it->get<T>();
  } catch (const std::exception&) {
    throw Error(Errc::ConfigError, "config key '" + key + "' has the wrong type");
  }
}

/// A scalar or a list of scalars.
template <typename T>
std::vector<T> get_list(const json& config, const std::string& key, std::vector<T> fallback) {
  const auto it = config.find(key);
  if (it == config.end() || it->is_null()) return fallback;
  if (!it->is_array()) return {get<T>(config, key, T{})};
  std::vector<T> out;
  for (size_t k = 0; k < it->size(); ++k) {
    json one = {{"v", (*it)[k]}};
    out.push_back(get<T>(one, "v", T{}));
  }
  if (out.empty()) throw Error(Errc::ConfigError, "config key '" + key + "' is an empty list");
  return out;
}

std::optional<std::pair<double, double>> get_range(const json& config, const std::string& key) {
  const auto it = config.find(key);
  if (it == config.end() || it->is_null()) return std::nullopt;
  const auto v = get_list<double>(config, key, {});
  if (v.size() != 2 || !(v[1] > v[0]))
    throw Error(Errc::ConfigError, "config key '" + key + "' must be [lo, hi] with lo < hi");
  return std::make_pair(v[0], v[1]);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(Errc::ConfigError, message);
}

const Keys kSmoothKeys = {"input",  "domain",      "grid_size",     "bandwidth",
                              "cv_candidates", "kernel", "ridge_epsilon",
                              "max_bandwidth_expansions", "threads"};
const Keys kExceedExtra = {"threshold_grid_size", "threshold_range", "prob_grid_size",
                               "delta", "eps_tail"};
const Keys kFrechetExtra = {"covariates",      "covariate_columns", "categorical",
                                "model_kind",      "local_bandwidth",   "local_kernel",
                                "model",           "queries",           "eta_thresholds"};

Keys concat(std::initializer_list<Keys> groups) {
  Keys out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

void reject_unknown(const json& config, const Keys& allowed) {
  if (!config.is_object()) throw Error(Errc::ConfigError, "config must be a JSON object");
  for (const auto& [key, value] : config.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw Error(Errc::ConfigError, "unknown config key '" + key + "'");
}

SmoothOptions smooth_fields(const json& config, bool input_required) {
  SmoothOptions o;
  const auto input = get<std::string>(config, "input", "");
  require(!input_required || !input.empty(), "an input CSV is required");
  o.input = input;
  if (const auto d = get_range(config, "domain")) o.domain = Domain{d->first, d->second};
  o.grid_size = get<Eigen::Index>(config, "grid_size", o.grid_size);
  require(o.grid_size >= 2, "grid_size must be >= 2");

  const auto bw = config.find("bandwidth");
  if (bw != config.end() && bw->is_number()) {
    o.bandwidth.kind = BandwidthChoice::Kind::fixed;
    o.bandwidth.value = bw->get<double>();
    require(o.bandwidth.value > 0.0 && std::isfinite(o.bandwidth.value), "bandwidth must be positive");
  } else {
    const auto rule = get<std::string>(config, "bandwidth", "theory_rate");
    if (rule == "theory_rate") o.bandwidth.kind = BandwidthChoice::Kind::theory_rate;
    else if (rule == "linear_rate") o.bandwidth.kind = BandwidthChoice::Kind::linear_rate;
    else if (rule == "cv") o.bandwidth.kind = BandwidthChoice::Kind::cross_validated;
    else throw Error(Errc::ConfigError, "bandwidth must be a number, 'theory_rate', 'linear_rate' or 'cv'");
  }
  o.bandwidth.candidates = get_list<double>(config, "cv_candidates", {});
  for (double c : o.bandwidth.candidates) require(c > 0.0, "cv_candidates must be positive");

  o.smoothing.kernel = parse_kernel(get<std::string>(config, "kernel", "epanechnikov"));
  o.smoothing.ridge_epsilon = get<double>(config, "ridge_epsilon", o.smoothing.ridge_epsilon);
  o.smoothing.max_bandwidth_expansions =
      get<int>(config, "max_bandwidth_expansions", o.smoothing.max_bandwidth_expansions);
  o.smoothing.validate();
  o.threads = get<int>(config, "threads", 1);
  require(o.threads >= 1, "threads must be >= 1");
  return o;
}

ExceedOptions exceed_fields(const json& config, bool input_required) {
  ExceedOptions o;
  o.smooth = smooth_fields(config, input_required);
  o.threshold_grid_size = get<Eigen::Index>(config, "threshold_grid_size", o.threshold_grid_size);
  require(o.threshold_grid_size >= 3, "threshold_grid_size must be >= 3");
  o.threshold_range = get_range(config, "threshold_range");
  o.prob_grid_size = get<Eigen::Index>(config, "prob_grid_size", o.prob_grid_size);
  require(o.prob_grid_size >= 3, "prob_grid_size must be >= 3");
  if (config.contains("delta") && !config["delta"].is_null()) {
    o.delta = get<double>(config, "delta", 0.0);
    require(*o.delta > 0.0, "delta must be positive");
  }
  o.eps_tail = get<double>(config, "eps_tail", o.eps_tail);
  require(o.eps_tail > 0.0 && o.eps_tail < 1.0, "eps_tail must lie in (0, 1)");
  return o;
}

struct CsvFile {
  std::ostringstream buffer;
  csv::Writer writer{buffer};
};

fs::path commit(CsvFile& file, const fs::path& dir, const char* name) {
  const fs::path path = dir / name;
  io::write_file_atomic(path, file.buffer.str());
  return path;
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create '" + dir.string() + "': " + ec.message());
}

using csv::format_double;

std::vector<RawTrajectory> load_input(const SmoothOptions& o) {
  return io::read_trajectories(o.input, o.domain);
}

long min_observations(const std::vector<RawTrajectory>& trajs) {
  long N = std::numeric_limits<long>::max();
  for (const auto& t : trajs) N = std::min(N, static_cast<long>(t.size()));
  return N;
}

}  // namespace

double BandwidthChoice::resolve(const RawTrajectory& traj, long n,
                                const SmoothingConfig& base) const {
  const long N = static_cast<long>(traj.size());
  const double L = traj.domain().length();
  switch (kind) {
    case Kind::fixed: return value;
    case Kind::theory_rate: return default_bandwidth(N, n, L);
    case Kind::linear_rate: return linear_rate_bandwidth(N, n, L);
    case Kind::cross_validated: {
      const std::vector<double> c = candidates.empty() ? default_cv_candidates(N, L) : candidates;
      return cv_bandwidth(traj, c, base);
    }
  }
  return value;
}

SmoothOptions parse_smooth_options(const json& config) {
  reject_unknown(config, concat({kSmoothKeys}));
  return smooth_fields(config, true);
}

ExceedOptions parse_exceed_options(const json& config) {
  reject_unknown(config, concat({kSmoothKeys, kExceedExtra}));
  return exceed_fields(config, true);
}

FrechetOptions parse_frechet_options(const json& config) {
  reject_unknown(config, concat({kSmoothKeys, kExceedExtra, kFrechetExtra}));
  FrechetOptions o;
  const auto model = get<std::string>(config, "model", "");
  if (!model.empty()) o.model = model;
  o.exceed = exceed_fields(config, !o.model);
  o.covariates = get<std::string>(config, "covariates", "");
  require(o.model || !o.covariates.empty(), "a covariate CSV is required");
  o.covariate_columns = get_list<std::string>(config, "covariate_columns", {});
  const auto cat = get_list<std::string>(config, "categorical", {});
  o.categorical.insert(cat.begin(), cat.end());
  o.model_kind = get<std::string>(config, "model_kind", o.model_kind);
  require(o.model_kind == "global" || o.model_kind == "local",
          "model_kind must be 'global' or 'local'");
  o.local_bandwidth = get<double>(config, "local_bandwidth", 0.0);
  require(o.local_bandwidth >= 0.0, "local_bandwidth must be nonnegative");
  o.local_kernel = parse_kernel(get<std::string>(config, "local_kernel", "epanechnikov"));
  o.queries = config.value("queries", json());
  require(o.queries.is_null() || o.queries.is_array(), "queries must be a list");
  o.eta_thresholds = get_list<double>(config, "eta_thresholds", {});
  return o;
}

SimulateOptions parse_simulate_options(const json& config) {
  reject_unknown(config,
                 {"table", "setting", "n", "N", "B", "nu0", "seed", "models", "time_grid_size",
                  "threshold_grid_size", "prob_grid_size", "bandwidth_rule", "fixed_bandwidth",
                  "cv_candidates", "kernel", "design", "local_bandwidth", "query_lo", "query_hi",
                  "query_count", "threads", "third_component", "c1", "d1"});
  SimulateOptions o;
  require(config.contains("seed") && !config["seed"].is_null(),
          "simulate requires a seed (config key 'seed' or --seed)");
  o.sim.seed = get<std::uint64_t>(config, "seed", 0);
  o.table = get<std::string>(config, "table", o.table);
  require(o.table == "marginal" || o.table == "regression",
          "table must be 'marginal' or 'regression'");
  const bool marginal = o.table == "marginal";
  o.setting = get<int>(config, "setting", 1);
  require(o.setting == 1 || o.setting == 2, "setting must be 1 or 2");
  o.n = get_list<long>(config, "n", {200});
  require(!marginal || o.n.size() == 1, "the marginal table takes a single n");
  o.N = get_list<long>(config, "N", {100, 200, 500});
  o.nu0 = get_list<double>(config, "nu0", marginal ? std::vector<double>{1.0, 0.5, 0.05}
                                                   : std::vector<double>{1.0});
  for (double v : o.nu0) require(v >= 0.0 && std::isfinite(v), "nu0 must be nonnegative");
  o.models = get_list<std::string>(config, "models", {"global", "local"});
  for (const auto& m : o.models) require(m == "global" || m == "local", "models are 'global' or 'local'");
  o.third_component = get<bool>(config, "third_component", false);
  if (config.contains("c1")) o.c1 = get<double>(config, "c1", 0.0);
  if (config.contains("d1")) o.d1 = get<double>(config, "d1", 0.0);

  SimConfig& s = o.sim;
  s.B = get<long>(config, "B", marginal ? 100 : 50);
  s.time_grid_size = get<Eigen::Index>(config, "time_grid_size", s.time_grid_size);
  s.threshold_grid_size = get<Eigen::Index>(config, "threshold_grid_size", s.threshold_grid_size);
  s.prob_grid_size = get<Eigen::Index>(config, "prob_grid_size", s.prob_grid_size);
  const auto rule = get<std::string>(config, "bandwidth_rule", "linear_rate");
  if (rule == "linear_rate") s.bandwidth_rule = BandwidthRule::linear_rate;
  else if (rule == "theory_rate") s.bandwidth_rule = BandwidthRule::theory_rate;
  else if (rule == "fixed") s.bandwidth_rule = BandwidthRule::fixed;
  else if (rule == "cv") s.bandwidth_rule = BandwidthRule::cross_validated;
  else throw Error(Errc::ConfigError, "bandwidth_rule must be linear_rate, theory_rate, fixed or cv");
  s.fixed_bandwidth = get<double>(config, "fixed_bandwidth", s.fixed_bandwidth);
  s.cv_candidates = get_list<double>(config, "cv_candidates", {});
  s.kernel = parse_kernel(get<std::string>(config, "kernel", "epanechnikov"));
  const auto design = get<std::string>(config, "design", "regular");
  require(design == "regular" || design == "random", "design must be 'regular' or 'random'");
  s.design = design == "regular" ? Design::regular : Design::random;
  s.local_bandwidth = get<double>(config, "local_bandwidth", 0.0);
  s.query_lo = get<double>(config, "query_lo", s.query_lo);
  s.query_hi = get<double>(config, "query_hi", s.query_hi);
  s.query_count = get<Eigen::Index>(config, "query_count", s.query_count);
  s.threads = get<int>(config, "threads", 1);
  for (long N : o.N) {
    s.N = N;
    for (long n : o.n) {
      s.n = n;
      s.validate();
    }
  }
  return o;
}

std::vector<SmoothedTrajectory> smooth_all(const std::vector<RawTrajectory>& trajs,
                                           const SmoothOptions& opts) {
  const long n = static_cast<long>(trajs.size());
  std::vector<SmoothedTrajectory> out(trajs.size());
  parallel_for(n, opts.threads, [&](long i) {
    const auto& traj = trajs[static_cast<size_t>(i)];
    try {
      SmoothingConfig cfg = opts.smoothing;
      cfg.bandwidth = opts.bandwidth.resolve(traj, n, opts.smoothing);
      out[static_cast<size_t>(i)] = smooth_on_grid(traj, opts.grid_size, cfg);
    } catch (const Error& e) {
      rethrow_with_context(e, "subject '" + traj.subject_id() + "'");
    }
  });
  return out;
}

ThresholdGrid threshold_grid_for(const std::vector<SmoothedTrajectory>& smoothed,
                                 const ExceedOptions& opts) {
  if (opts.threshold_range)
    return ThresholdGrid::equispaced(opts.threshold_range->first, opts.threshold_range->second,
                                     opts.threshold_grid_size);
  return default_threshold_grid(smoothed, opts.threshold_grid_size);
}

double delta_for(const std::vector<RawTrajectory>& trajs, const ThresholdGrid& grid,
                 const ExceedOptions& opts) {
  if (opts.delta) return *opts.delta;
  return default_delta(min_observations(trajs), static_cast<long>(trajs.size()), grid.range());
}

std::vector<fs::path> cmd_smooth(const json& config, const fs::path& out_dir) {
  const SmoothOptions opts = parse_smooth_options(config);
  const auto trajs = load_input(opts);
  const auto smoothed = smooth_all(trajs, opts);

  prepare_dir(out_dir);
  CsvFile file;
  file.writer.row({"subject_id", "t", "value"});
  for (size_t i = 0; i < trajs.size(); ++i)
    for (Eigen::Index k = 0; k < smoothed[i].grid.size(); ++k)
      file.writer.row({trajs[i].subject_id(), format_double(smoothed[i].grid[k]),
                       format_double(smoothed[i].values[k])});
  return {commit(file, out_dir, "smoothed.csv")};
}

std::vector<fs::path> cmd_exceed(const json& config, const fs::path& out_dir) {
  const ExceedOptions opts = parse_exceed_options(config);
  const auto trajs = load_input(opts.smooth);
  const auto smoothed = smooth_all(trajs, opts.smooth);
  const ThresholdGrid grid = threshold_grid_for(smoothed, opts);
  const double delta = delta_for(trajs, grid, opts);

  std::vector<ExceedanceChain> chains(trajs.size());
  parallel_for(static_cast<long>(trajs.size()), opts.smooth.threads, [&](long i) {
    const auto k = static_cast<size_t>(i);
    try {
      chains[k] = exceedance_chain(smoothed[k], grid, opts.prob_grid_size, delta, opts.eps_tail);
    } catch (const Error& e) {
      rethrow_with_context(e, "subject '" + trajs[k].subject_id() + "'");
    }
  });

  prepare_dir(out_dir);
  CsvFile s, f, q, d, h;
  s.writer.row({"subject_id", "u", "value"});
  f.writer.row({"subject_id", "u", "value"});
  q.writer.row({"subject_id", "q", "value"});
  d.writer.row({"subject_id", "u", "value"});
  h.writer.row({"subject_id", "u", "value"});
  for (size_t i = 0; i < trajs.size(); ++i) {
    const std::string& id = trajs[i].subject_id();
    const auto& c = chains[i];
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
      const std::string u = format_double(grid[k]);
      s.writer.row({id, u, format_double(c.exceedance.s_values[k])});
      f.writer.row({id, u, format_double(c.distribution.f_values[k])});
      d.writer.row({id, u, format_double(c.density.d_values[k])});
    }
    for (Eigen::Index k = 0; k < c.quantile.prob_grid.size(); ++k)
      q.writer.row({id, format_double(c.quantile.prob_grid[k]), format_double(c.quantile.q_values[k])});
    for (Eigen::Index k = 0; k < c.centrality.grid.size(); ++k)
      h.writer.row({id, format_double(c.centrality.grid[k]), format_double(c.centrality.h_values[k])});
  }
  return {commit(s, out_dir, "exceedance.csv"), commit(f, out_dir, "distribution.csv"),
          commit(q, out_dir, "quantile.csv"), commit(d, out_dir, "density.csv"),
          commit(h, out_dir, "centrality.csv")};
}

io::ModelArtifact fit_model(const std::vector<RawTrajectory>& trajs, const FrechetOptions& opts) {
  const auto smoothed = smooth_all(trajs, opts.exceed.smooth);
  const ThresholdGrid grid = threshold_grid_for(smoothed, opts.exceed);
  ResponseSet responses = build_responses(smoothed, grid, opts.exceed.prob_grid_size);

  std::vector<std::string> ids;
  for (const auto& t : trajs) ids.push_back(t.subject_id());
  io::CovariateData cov =
      io::read_covariates(opts.covariates, ids, opts.covariate_columns, opts.categorical);

  io::ModelArtifact a;
  a.schema = cov.schema;
  a.delta = delta_for(trajs, grid, opts.exceed);
  a.eps_tail = opts.exceed.eps_tail;
  if (opts.model_kind == "global") {
    a.model = GlobalFrechetModel::fit(std::move(responses), std::move(cov.sample));
    return a;
  }
  if (cov.sample.p() != 1 || cov.schema.columns.front().categorical)
    throw Error(Errc::ConfigError, "local Frechet regression needs exactly one numeric covariate");
  const Eigen::VectorXd xs = cov.sample.rows.col(0);
  double b = opts.local_bandwidth;
  if (b == 0.0)
    b = default_local_bandwidth(static_cast<long>(xs.size()),
                                std::sqrt((xs.array() - xs.mean()).square().mean()));
  a.model = LocalFrechetModel::fit(std::move(responses), xs, b, opts.local_kernel);
  return a;
}

std::vector<Query> resolve_queries(const io::ModelArtifact& artifact, const json& queries) {
  Eigen::MatrixXd X;
  if (const auto* g = std::get_if<GlobalFrechetModel>(&artifact.model)) X = g->covariates().rows;
  else X = std::get<LocalFrechetModel>(artifact.model).xs();

  const auto& cols = artifact.schema.columns;
  const bool scalar = cols.size() == 1 && !cols.front().categorical;
  std::vector<Query> out;
  if (queries.is_null()) {
    if (scalar) {
      const Eigen::VectorXd grid = equispaced(X.col(0).minCoeff(), X.col(0).maxCoeff(), 21);
      for (double x : grid) out.push_back({format_double(x), Eigen::VectorXd::Constant(1, x)});
    } else {
      out.push_back({"mean", X.colwise().mean().transpose()});
    }
    return out;
  }
  for (const auto& q : queries) {
    if (q.is_number()) {
      if (!scalar) throw Error(Errc::ConfigError, "numeric queries need a single numeric covariate");
      const double x = q.get<double>();
      out.push_back({format_double(x), Eigen::VectorXd::Constant(1, x)});
      continue;
    }
    if (!q.is_object()) throw Error(Errc::ConfigError, "each query is a number or an object");
    std::map<std::string, std::string> raw;
    for (const auto& [key, value] : q.items()) {
      if (value.is_number()) raw[key] = format_double(value.get<double>());
      else if (value.is_string()) raw[key] = value.get<std::string>();
      else throw Error(Errc::ConfigError, "query value for '" + key + "' must be a number or string");
    }
    for (const auto& [key, value] : raw)
      if (std::none_of(cols.begin(), cols.end(), [&](const auto& c) { return c.name == key; }))
        throw Error(Errc::ConfigError, "query names unknown covariate '" + key + "'");
    std::string label;
    for (const auto& c : cols) {
      if (!label.empty()) label += ";";
      const auto it = raw.find(c.name);
      label += c.name + "=" + (it == raw.end() ? std::string("?") : it->second);
    }
    out.push_back({scalar ? raw.begin()->second : label, artifact.schema.encode(raw)});
  }
  return out;
}

std::vector<fs::path> cmd_frechet(const json& config, const fs::path& out_dir) {
  const FrechetOptions opts = parse_frechet_options(config);
  io::ModelArtifact artifact = opts.model ? io::load_model(*opts.model)
                                          : fit_model(load_input(opts.exceed.smooth), opts);
  const std::vector<Query> queries = resolve_queries(artifact, opts.queries);
  const ResponseSet& r = responses_of(artifact.model);

  std::vector<double> eta_us = opts.eta_thresholds;
  if (eta_us.empty())
    for (double p : {0.25, 0.5, 0.75}) eta_us.push_back(r.thresholds.min() + p * r.thresholds.range());

  std::vector<ConditionalExceedance> preds(queries.size());
  for (size_t k = 0; k < queries.size(); ++k) {
    try {
      preds[k] = predict_conditional(artifact.model, queries[k].x, artifact.delta, artifact.eps_tail);
    } catch (const Error& e) {
      rethrow_with_context(e, "query '" + queries[k].label + "'");
    }
  }
  Eigen::MatrixXd qx(static_cast<Eigen::Index>(queries.size()), queries.front().x.size());
  for (size_t k = 0; k < queries.size(); ++k) qx.row(static_cast<Eigen::Index>(k)) = queries[k].x.transpose();

  prepare_dir(out_dir);
  std::vector<fs::path> written;
  if (!opts.model) {
    io::save_model(out_dir / "model.json", artifact);
    written.push_back(out_dir / "model.json");
  }

  CsvFile p, qp, eta;
  p.writer.row({"x", "u", "value", "profile_kind"});
  qp.writer.row({"x", "q", "value", "profile_kind"});
  eta.writer.row({"x", "u", "value", "profile_kind"});
  for (size_t k = 0; k < queries.size(); ++k) {
    const auto& c = preds[k];
    const std::string& x = queries[k].label;
    const auto& g = c.exceedance.grid;
    for (Eigen::Index j = 0; j < g.size(); ++j)
      p.writer.row({x, format_double(g[j]), format_double(c.exceedance.s_values[j]), "exceedance"});
    for (Eigen::Index j = 0; j < g.size(); ++j)
      p.writer.row({x, format_double(g[j]), format_double(c.distribution.f_values[j]), "distribution"});
    for (Eigen::Index j = 0; j < g.size(); ++j)
      p.writer.row({x, format_double(g[j]), format_double(c.density.d_values[j]), "density"});
    for (Eigen::Index j = 0; j < c.centrality.grid.size(); ++j)
      p.writer.row({x, format_double(c.centrality.grid[j]), format_double(c.centrality.h_values[j]),
                    "centrality"});
    for (Eigen::Index j = 0; j < c.quantile.prob_grid.size(); ++j)
      qp.writer.row({x, format_double(c.quantile.prob_grid[j]), format_double(c.quantile.q_values[j]),
                     "quantile"});
  }
  for (double u : eta_us) {
    const Eigen::VectorXd values = threshold_exceedance_function(artifact.model, u, qx, r.domain_length);
    for (size_t k = 0; k < queries.size(); ++k)
      eta.writer.row({queries[k].label, format_double(u),
                      format_double(values[static_cast<Eigen::Index>(k)]), "threshold_exceedance"});
  }
  written.push_back(commit(p, out_dir, "predictions.csv"));
  written.push_back(commit(qp, out_dir, "quantile_predictions.csv"));
  written.push_back(commit(eta, out_dir, "eta.csv"));
  return written;
}

std::vector<fs::path> cmd_simulate(const json& config, const fs::path& out_dir) {
  const SimulateOptions opts = parse_simulate_options(config);
  CsvFile table, reps;
  std::vector<std::string> header;

  if (opts.table == "marginal") {
    header = {"N"};
    for (double v : opts.nu0) header.push_back("nu0=" + format_double(v));
    table.writer.row(header);
    reps.writer.row({"nu0", "N", "replicate", "mean_wasserstein"});
    std::vector<std::vector<std::string>> rows;
    for (long N : opts.N) {
      std::vector<std::string> row{std::to_string(N)};
      for (double nu0 : opts.nu0) {
        SimConfig cfg = opts.sim;
        cfg.N = N;
        cfg.n = opts.n.front();
        const KLSpec spec = opts.setting == 1 ? KLSpec::setting_one(nu0)
                                              : KLSpec::setting_two(nu0, 15.0, opts.third_component);
        const MarginalResult res = run_marginal_rmse(spec, cfg);
        row.push_back(format_double(res.mean_rmse));
        for (size_t b = 0; b < res.replicate_mean_dw.size(); ++b)
          reps.writer.row({format_double(nu0), std::to_string(N), std::to_string(b),
                           format_double(res.replicate_mean_dw[b])});
      }
      table.writer.row(row);
    }
  } else {
    header = {"model", "n", "nu0", "statistic"};
    for (long N : opts.N) header.push_back("N=" + std::to_string(N));
    table.writer.row(header);
    reps.writer.row({"model", "n", "nu0", "N", "replicate", "rmse"});
    for (const auto& model : opts.models) {
      const ModelKind kind = model == "global" ? ModelKind::global : ModelKind::local;
      RegressionSimSpec spec =
          opts.setting == 1
              ? (kind == ModelKind::global ? RegressionSimSpec::global_setting_one()
                                           : RegressionSimSpec::local_setting_one())
              : (kind == ModelKind::global ? RegressionSimSpec::global_setting_two()
                                           : RegressionSimSpec::local_setting_two());
      if (kind == ModelKind::local) {
        if (opts.c1) spec.kappa.c1 = *opts.c1;
        if (opts.d1) spec.kappa.d1 = *opts.d1;
      }
      if (opts.third_component && opts.setting == 2) {
        const RegressionSimSpec base = spec;
        spec.base = KLSpec::setting_two(base.base.noise.nu0, base.base.mean.m0, true);
        spec.base.noise = base.base.noise;
        spec.base.mean = base.base.mean;
      }
      for (long n : opts.n) {
        for (double nu0 : opts.nu0) {
          std::vector<std::string> means{model, std::to_string(n), format_double(nu0), "mean"};
          std::vector<std::string> sds{model, std::to_string(n), format_double(nu0), "sd"};
          for (long N : opts.N) {
            SimConfig cfg = opts.sim;
            cfg.n = n;
            cfg.N = N;
            const RegressionResult res = run_regression_rmse(kind, spec, cfg, nu0);
            means.push_back(format_double(res.mean));
            sds.push_back(format_double(res.sd));
            for (size_t b = 0; b < res.replicate_rmse.size(); ++b)
              reps.writer.row({model, std::to_string(n), format_double(nu0), std::to_string(N),
                               std::to_string(b), format_double(res.replicate_rmse[b])});
          }
          table.writer.row(means);
          table.writer.row(sds);
        }
      }
    }
  }
  prepare_dir(out_dir);
  return {commit(table, out_dir, "table.csv"), commit(reps, out_dir, "replicates.csv")};
}

json read_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open config '" + path.string() + "'");
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw Error(Errc::ConfigError, path.string() + ": config must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path.string() + ": " + e.what());
  }
}

}  // namespace exceed::cli
