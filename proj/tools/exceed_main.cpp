#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "exceed/commands.hpp"
#include "exceed/error.hpp"

namespace {

using exceed::cli::json;
namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out = ".";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "64-bit RNG seed");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output directory");
}

std::string one_line(std::string s) {
  for (char& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

std::optional<int> env_threads() {
  const char* v = std::getenv("EXCEED_THREADS");
  if (!v || !*v) return std::nullopt;
  int out = 0;
  const std::string_view s(v);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || out < 1)
    throw exceed::Error(exceed::Errc::ConfigError, "EXCEED_THREADS must be a positive integer");
  return out;
}

json merged_config(const Common& c, bool takes_seed) {
  json config = c.config.empty() ? json::object() : exceed::cli::read_config(c.config);
  if (takes_seed && c.seed) config["seed"] = *c.seed;
  if (c.threads) {
    config["threads"] = *c.threads;
  } else if (!config.contains("threads")) {
    if (const auto t = env_threads()) config["threads"] = *t;
  }
  return config;
}

void report(const std::vector<fs::path>& written) {
  for (const auto& p : written) std::cout << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exceedance functions, their Wasserstein geometry and Frechet regression"};
  app.require_subcommand(1);

  Common common;
  std::string input, covariates, model;

  auto* smooth = app.add_subcommand("smooth", "local-linear reconstruction on a dense grid");
  smooth->add_option("input", input, "long CSV with subject_id,t,z");
  add_common(smooth, common);

  auto* exceed_cmd = app.add_subcommand("exceed", "exceedance, distribution, quantile, density, centrality");
  exceed_cmd->add_option("input", input, "long CSV with subject_id,t,z");
  add_common(exceed_cmd, common);

  auto* frechet = app.add_subcommand("frechet", "global or local Frechet regression of exceedance profiles");
  frechet->add_option("input", input, "long CSV with subject_id,t,z");
  frechet->add_option("covariates", covariates, "CSV with subject_id and covariate columns");
  frechet->add_option("--model", model, "predict from a saved model instead of fitting");
  add_common(frechet, common);

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo tables");
  add_common(simulate, common);

  auto* version = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: UsageError: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (version->parsed()) {
      std::cout << "exceed " << exceed::cli::kVersion << "\n";
      return 0;
    }
    const fs::path out = common.out;
    if (simulate->parsed()) {
      report(exceed::cli::cmd_simulate(merged_config(common, true), out));
      return 0;
    }
    json config = merged_config(common, false);
    if (!input.empty()) config["input"] = input;
    if (smooth->parsed()) {
      report(exceed::cli::cmd_smooth(config, out));
    } else if (exceed_cmd->parsed()) {
      report(exceed::cli::cmd_exceed(config, out));
    } else {
      if (!covariates.empty()) config["covariates"] = covariates;
      if (!model.empty()) config["model"] = model;
      report(exceed::cli::cmd_frechet(config, out));
    }
    return 0;
  } catch (const exceed::Error& e) {
    std::cerr << "error: " << exceed::to_string(e.code()) << ": " << one_line(e.what()) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << one_line(e.what()) << "\n";
  }
  return 1;
}
