#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "exceed/commands.hpp"
#include "exceed/csv.hpp"
#include "exceed/error.hpp"
#include "exceed/wasserstein.hpp"

using namespace exceed;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "exceed_cli_tests";

struct Run {
  int status;
  std::string err;
};

Run run(const std::string& args) {
  fs::create_directories(kRoot);
  const fs::path err = kRoot / "stderr.txt";
  const std::string cmd = std::string(EXCEED_CLI) + " " + args + " 2> " + err.string() + " > /dev/null";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream buf;
  buf << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, buf.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

csv::Table table(const fs::path& p) { return csv::read_file(p.string()); }

std::vector<double> column(const csv::Table& t, const std::string& name) {
  std::vector<double> out;
  const long c = t.column(name);
  for (const auto& row : t.rows) out.push_back(csv::parse_double(row[static_cast<size_t>(c)], name));
  return out;
}

/// Noisy subjects with a numeric and a categorical covariate.
void make_dataset(const fs::path& obs, const fs::path& cov) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> U(1, 5);
  std::normal_distribution<double> N01;
  std::ofstream o(obs), c(cov);
  o << "subject_id,t,z\n";
  c << "subject_id,x,group\n";
  for (int i = 0; i < 25; ++i) {
    const double x = U(gen);
    c << "s" << i << "," << csv::format_double(x) << "," << (i % 3 ? "b" : "a") << "\n";
    for (int j = 0; j < 60; ++j) {
      const double t = j / 59.0;
      o << "s" << i << "," << csv::format_double(t) << ","
        << csv::format_double(x * (1 + std::sin(2 * M_PI * t)) + 0.2 * N01(gen)) << "\n";
    }
  }
}

}  // namespace

TEST_CASE("version and usage errors") {
  CHECK(run("version").status == 0);
  const auto bad = run("smooth --frobnicate");
  CHECK(bad.status == 2);
  CHECK(bad.err.rfind("error: UsageError: ", 0) == 0);
  CHECK(run("").status != 0);
}

TEST_CASE("smooth: constant subject, malformed rows, API agreement") {
  const fs::path dir = kRoot / "smooth";
  fs::create_directories(dir);
  write(dir / "const.csv", "subject_id,t,z\nc,0,4\nc,0.25,4\nc,0.5,4\nc,0.75,4\nc,1,4\n");
  REQUIRE(run("smooth " + (dir / "const.csv").string() + " --out " + (dir / "o1").string()).status == 0);
  for (double v : column(table(dir / "o1" / "smoothed.csv"), "value")) CHECK(v == doctest::Approx(4.0).epsilon(1e-12));

  write(dir / "bad.csv", "subject_id,t,z\nc,0,4\nc,0.5\nc,1,4\n");
  const auto bad = run("smooth " + (dir / "bad.csv").string() + " --out " + (dir / "o2").string());
  CHECK(bad.status == 1);
  CHECK(bad.err.rfind("error: ParseError: ", 0) == 0);
  CHECK(bad.err.find("bad.csv:3") != std::string::npos);
  CHECK(std::count(bad.err.begin(), bad.err.end(), '\n') == 1);

  make_dataset(dir / "obs.csv", dir / "cov.csv");
  write(dir / "cfg.json", R"({"bandwidth": "cv", "grid_size": 51})");
  REQUIRE(run("smooth " + (dir / "obs.csv").string() + " --config " + (dir / "cfg.json").string() +
              " --threads 3 --out " + (dir / "o3").string())
              .status == 0);
  const auto cli = table(dir / "o3" / "smoothed.csv");
  cli::json cfg = cli::read_config(dir / "cfg.json");
  cfg["input"] = (dir / "obs.csv").string();
  const auto opts = cli::parse_smooth_options(cfg);
  const auto api = cli::smooth_all(io::read_trajectories(opts.input), opts);
  size_t r = 0;
  for (const auto& s : api)
    for (Eigen::Index k = 0; k < s.grid.size(); ++k, ++r) {
      CHECK(csv::parse_double(cli.rows[r][1], "t") == s.grid[k]);
      CHECK(csv::parse_double(cli.rows[r][2], "v") == s.values[k]);
    }
  CHECK(r == cli.rows.size());
}

TEST_CASE("config validation") {
  const fs::path dir = kRoot / "config";
  fs::create_directories(dir);
  make_dataset(dir / "obs.csv", dir / "cov.csv");
  write(dir / "unknown.json", R"({"bandwith": 0.1})");
  const auto r1 = run("smooth " + (dir / "obs.csv").string() + " --config " + (dir / "unknown.json").string() +
                      " --out " + dir.string());
  CHECK(r1.status == 1);
  CHECK(r1.err.find("ConfigError") != std::string::npos);
  CHECK(r1.err.find("bandwith") != std::string::npos);
  write(dir / "type.json", R"({"grid_size": "many"})");
  CHECK(run("smooth " + (dir / "obs.csv").string() + " --config " + (dir / "type.json").string()).status == 1);
  CHECK_THROWS_AS(cli::parse_simulate_options(cli::json::object()), Error);
  CHECK_THROWS_AS(cli::parse_simulate_options({{"seed", 1}, {"table", "other"}}), Error);
  CHECK_THROWS_AS(cli::parse_frechet_options({{"input", "x.csv"}}), Error);
}

TEST_CASE("exceed: identity trajectory and API agreement") {
  const fs::path dir = kRoot / "exceed";
  fs::create_directories(dir);
  std::ostringstream id;
  id << "subject_id,t,z\n";
  for (int j = 0; j <= 100; ++j) id << "line," << csv::format_double(j / 100.0) << "," << csv::format_double(j / 100.0) << "\n";
  write(dir / "identity.csv", id.str());
  write(dir / "cfg.json", R"({"bandwidth": 0.05, "threshold_range": [0, 1], "threshold_grid_size": 11})");
  REQUIRE(run("exceed " + (dir / "identity.csv").string() + " --config " + (dir / "cfg.json").string() +
              " --out " + (dir / "o1").string())
              .status == 0);
  const auto s = table(dir / "o1" / "exceedance.csv");
  const auto u = column(s, "u"), v = column(s, "value");
  for (size_t k = 0; k < u.size(); ++k) CHECK(v[k] == doctest::Approx(1 - u[k]).epsilon(1e-9));

  make_dataset(dir / "obs.csv", dir / "cov.csv");
  REQUIRE(run("exceed " + (dir / "obs.csv").string() + " --out " + (dir / "o2").string()).status == 0);
  const cli::json cfg = {{"input", (dir / "obs.csv").string()}};
  const auto opts = cli::parse_exceed_options(cfg);
  const auto trajs = io::read_trajectories(opts.smooth.input);
  const auto smoothed = cli::smooth_all(trajs, opts.smooth);
  const auto grid = cli::threshold_grid_for(smoothed, opts);
  const double delta = cli::delta_for(trajs, grid, opts);
  const auto S = table(dir / "o2" / "exceedance.csv");
  const auto Q = table(dir / "o2" / "quantile.csv");
  const auto H = table(dir / "o2" / "centrality.csv");
  size_t rs = 0, rq = 0, rh = 0;
  for (size_t i = 0; i < trajs.size(); ++i) {
    const auto chain = exceedance_chain(smoothed[i], grid, opts.prob_grid_size, delta, opts.eps_tail);
    double prev = INFINITY;
    for (Eigen::Index k = 0; k < grid.size(); ++k, ++rs) {
      CHECK(S.rows[rs][0] == trajs[i].subject_id());
      const double value = csv::parse_double(S.rows[rs][2], "v");
      CHECK(value == chain.exceedance.s_values[k]);
      CHECK(value <= prev);
      prev = value;
    }
    for (Eigen::Index k = 0; k < chain.quantile.q_values.size(); ++k, ++rq)
      CHECK(csv::parse_double(Q.rows[rq][2], "v") == chain.quantile.q_values[k]);
    for (Eigen::Index k = 0; k < chain.centrality.h_values.size(); ++k, ++rh)
      CHECK(csv::parse_double(H.rows[rh][2], "v") == chain.centrality.h_values[k]);
  }
  CHECK(rs == S.rows.size());
  CHECK(rq == Q.rows.size());
  CHECK(rh == H.rows.size());
}

TEST_CASE("frechet: fit, reload, and prediction checks") {
  const fs::path dir = kRoot / "frechet";
  fs::create_directories(dir);
  make_dataset(dir / "obs.csv", dir / "cov.csv");
  write(dir / "global.json", R"({"categorical": ["group"], "queries": [{"x": 2.5, "group": "b"}, {"x": 4, "group": "a"}]})");
  REQUIRE(run("frechet " + (dir / "obs.csv").string() + " " + (dir / "cov.csv").string() + " --config " +
              (dir / "global.json").string() + " --out " + (dir / "g").string())
              .status == 0);
  CHECK(fs::exists(dir / "g" / "model.json"));

  REQUIRE(run("frechet --model " + (dir / "g" / "model.json").string() + " --config " + (dir / "global.json").string() +
              " --out " + (dir / "g2").string())
              .status == 0);
  for (const char* f : {"predictions.csv", "quantile_predictions.csv", "eta.csv"})
    CHECK(slurp(dir / "g" / f) == slurp(dir / "g2" / f));

  // Query at the covariate mean: the projected plain average of the responses.
  const auto artifact = io::load_model(dir / "g" / "model.json");
  const auto& g = std::get<GlobalFrechetModel>(artifact.model);
  const Eigen::VectorXd mean = g.covariates().rows.colwise().mean().transpose();
  const auto r = g.responses();
  const RawQuantileCandidate avg{r.prob_grid, r.quantiles.colwise().mean().transpose()};
  const auto expect = project_to_quantile_space(avg, r.thresholds.min(), r.thresholds.max());
  CHECK((predict_quantile(artifact.model, mean).q_values - expect.q_values).cwiseAbs().maxCoeff() < 1e-12);

  // eta is nonincreasing in u for every query.
  write(dir / "eta.json", R"({"categorical": ["group"], "eta_thresholds": [2, 3, 4, 5, 6, 7, 8]})");
  REQUIRE(run("frechet " + (dir / "obs.csv").string() + " " + (dir / "cov.csv").string() + " --config " +
              (dir / "eta.json").string() + " --out " + (dir / "e").string())
              .status == 0);
  const auto eta = table(dir / "e" / "eta.csv");
  std::map<std::string, std::vector<double>> by_x;
  for (const auto& row : eta.rows) by_x[row[0]].push_back(csv::parse_double(row[2], "v"));
  for (const auto& [x, values] : by_x)
    for (size_t k = 1; k < values.size(); ++k) CHECK(values[k] <= values[k - 1]);

  write(dir / "local.json", R"({"covariate_columns": ["x"], "model_kind": "local", "queries": [2, 3, 4]})");
  REQUIRE(run("frechet " + (dir / "obs.csv").string() + " " + (dir / "cov.csv").string() + " --config " +
              (dir / "local.json").string() + " --out " + (dir / "l").string())
              .status == 0);
  const auto lp = table(dir / "l" / "quantile_predictions.csv");
  CHECK(lp.header == std::vector<std::string>{"x", "q", "value", "profile_kind"});
  CHECK(lp.rows.front()[0] == "2");

  write(dir / "bad.json", R"({"covariate_columns": ["x", "group"], "categorical": ["group"], "model_kind": "local"})");
  CHECK(run("frechet " + (dir / "obs.csv").string() + " " + (dir / "cov.csv").string() + " --config " +
            (dir / "bad.json").string() + " --out " + (dir / "bad").string())
            .status == 1);
}

TEST_CASE("simulate: seeds, determinism, smoke run") {
  const fs::path dir = kRoot / "simulate";
  fs::create_directories(dir);
  const auto missing = run("simulate --out " + dir.string());
  CHECK(missing.status == 1);
  CHECK(missing.err.find("seed") != std::string::npos);

  write(dir / "small.json", R"({"B": 1, "n": 10, "N": [50, 80], "nu0": [1, 0.05]})");
  for (const char* out : {"a", "b"})
    REQUIRE(run("simulate --seed 11 --config " + (dir / "small.json").string() + " --out " + (dir / out).string())
                .status == 0);
  CHECK(slurp(dir / "a" / "table.csv") == slurp(dir / "b" / "table.csv"));
  CHECK(slurp(dir / "a" / "replicates.csv") == slurp(dir / "b" / "replicates.csv"));
  const auto t = table(dir / "a" / "table.csv");
  CHECK(t.header == std::vector<std::string>{"N", "nu0=1", "nu0=0.05"});
  CHECK(t.rows.size() == 2);

  write(dir / "reg.json", R"({"table": "regression", "B": 1, "n": 30, "N": [60], "query_count": 5})");
  REQUIRE(run("simulate --seed 3 --config " + (dir / "reg.json").string() + " --out " + (dir / "r").string()).status == 0);
  const auto reg = table(dir / "r" / "table.csv");
  CHECK(reg.header == std::vector<std::string>{"model", "n", "nu0", "statistic", "N=60"});
  CHECK(reg.rows.size() == 4);
}
