#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "exceed/csv.hpp"
#include "exceed/frechet.hpp"
#include "exceed/profiles.hpp"
#include "exceed/smoothing.hpp"

namespace exceed::io {

namespace fs = std::filesystem;

/// Long-format observations (subject_id, t, z). Subjects keep their order of
/// first appearance; observations are sorted by t within a subject. The
/// domain is [min t, max t] over the file unless given.
std::vector<RawTrajectory> read_trajectories(const fs::path& path,
                                             std::optional<Domain> domain = std::nullopt);
std::vector<RawTrajectory> parse_trajectories(const csv::Table& table, const std::string& source,
                                              std::optional<Domain> domain = std::nullopt);

struct CovariateColumn {
  std::string name;
  bool categorical = false;
  std::vector<std::string> levels;  // sorted; the first is the dropped reference
};

/// Maps raw covariate columns to a design row. Categorical columns become
/// one-hot indicators for every level but the first.
struct CovariateSchema {
  std::vector<CovariateColumn> columns;

  std::vector<std::string> encoded_names() const;
  Eigen::VectorXd encode(const std::map<std::string, std::string>& raw) const;
};

struct CovariateData {
  CovariateSchema schema;
  CovariateSample sample;
};

/// Reads the covariate CSV (subject_id plus one column per covariate) and
/// builds the design rows in the order of `subject_order`. `use` selects
/// columns (empty: all but subject_id).
CovariateData read_covariates(const fs::path& path, const std::vector<std::string>& subject_order,
                              const std::vector<std::string>& use,
                              const std::set<std::string>& categorical);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const fs::path& path, const std::string& content);

/// Saved Frechet model plus what is needed to encode queries and rebuild
/// the conditional chain.
struct ModelArtifact {
  FrechetModel model;
  CovariateSchema schema;
  double delta = 0.0;
  double eps_tail = 0.05;
};

std::string serialize_model(const ModelArtifact& artifact);
ModelArtifact deserialize_model(const std::string& text, const std::string& source);
void save_model(const fs::path& path, const ModelArtifact& artifact);
ModelArtifact load_model(const fs::path& path);

}  // namespace exceed::io
