#include "exceed/io.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "exceed/error.hpp"

namespace exceed::io {

using nlohmann::json;

std::vector<RawTrajectory> parse_trajectories(const csv::Table& table, const std::string& source,
                                              std::optional<Domain> domain) {
  const long id_col = table.column("subject_id");
  const long t_col = table.column("t");
  const long z_col = table.column("z");
  if (id_col < 0 || t_col < 0 || z_col < 0)
    throw Error(Errc::ParseError, source + ":1: header must contain subject_id, t, z");
  if (table.rows.empty()) throw Error(Errc::InsufficientData, source + ": no observations");

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> by_subject;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = source + ":" + std::to_string(table.line_numbers[r]);
    const std::string& id = row[static_cast<size_t>(id_col)];
    if (id.empty()) throw Error(Errc::ParseError, where + ": empty subject_id");
    const double t = csv::parse_double(row[static_cast<size_t>(t_col)], where + ": column t");
    const double z = csv::parse_double(row[static_cast<size_t>(z_col)], where + ": column z");
    auto [it, inserted] = by_subject.try_emplace(id);
    if (inserted) order.push_back(id);
    it->second.emplace_back(t, z);
  }

  if (!domain) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& [id, obs] : by_subject)
      for (const auto& [t, z] : obs) {
        lo = std::min(lo, t);
        hi = std::max(hi, t);
      }
    domain = Domain{lo, hi};
  }

  std::vector<RawTrajectory> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    auto& obs = by_subject[id];
    std::stable_sort(obs.begin(), obs.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    Eigen::VectorXd t(static_cast<Eigen::Index>(obs.size()));
    Eigen::VectorXd z(t.size());
    for (size_t j = 0; j < obs.size(); ++j) {
      t[static_cast<Eigen::Index>(j)] = obs[j].first;
      z[static_cast<Eigen::Index>(j)] = obs[j].second;
    }
    try {
      out.emplace_back(id, std::move(t), std::move(z), *domain);
    } catch (const Error& e) {
      rethrow_with_context(e, source);
    }
  }
  return out;
}

std::vector<RawTrajectory> read_trajectories(const fs::path& path, std::optional<Domain> domain) {
  return parse_trajectories(csv::read_file(path.string()), path.string(), domain);
}

std::vector<std::string> CovariateSchema::encoded_names() const {
  std::vector<std::string> names;
  for (const auto& c : columns) {
    if (!c.categorical) {
      names.push_back(c.name);
      continue;
    }
    for (size_t l = 1; l < c.levels.size(); ++l) names.push_back(c.name + "=" + c.levels[l]);
  }
  return names;
}

Eigen::VectorXd CovariateSchema::encode(const std::map<std::string, std::string>& raw) const {
  std::vector<double> row;
  for (const auto& c : columns) {
    const auto it = raw.find(c.name);
    if (it == raw.end()) throw Error(Errc::InvalidInput, "missing covariate '" + c.name + "'");
    if (!c.categorical) {
      row.push_back(csv::parse_double(it->second, "covariate '" + c.name + "'"));
      continue;
    }
    const auto level = std::find(c.levels.begin(), c.levels.end(), it->second);
    if (level == c.levels.end())
      throw Error(Errc::InvalidInput,
                  "unknown level '" + it->second + "' for covariate '" + c.name + "'");
    const auto index = static_cast<size_t>(level - c.levels.begin());
    for (size_t l = 1; l < c.levels.size(); ++l) row.push_back(l == index ? 1.0 : 0.0);
  }
  return Eigen::Map<Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size()));
}

CovariateData read_covariates(const fs::path& path, const std::vector<std::string>& subject_order,
                              const std::vector<std::string>& use,
                              const std::set<std::string>& categorical) {
  const std::string source = path.string();
  const csv::Table table = csv::read_file(source);
  const long id_col = table.column("subject_id");
  if (id_col < 0) throw Error(Errc::ParseError, source + ":1: header must contain subject_id");

  std::vector<std::string> names = use;
  if (names.empty())
    for (const auto& h : table.header)
      if (h != "subject_id") names.push_back(h);
  if (names.empty()) throw Error(Errc::InvalidInput, source + ": no covariate columns");
  for (const auto& c : categorical)
    if (std::find(names.begin(), names.end(), c) == names.end())
      throw Error(Errc::ConfigError, "categorical covariate '" + c + "' is not among the used columns");

  std::map<std::string, std::map<std::string, std::string>> by_subject;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::map<std::string, std::string> raw;
    for (const auto& name : names) {
      const long col = table.column(name);
      if (col < 0) throw Error(Errc::ParseError, source + ":1: missing column '" + name + "'");
      raw[name] = row[static_cast<size_t>(col)];
    }
    const std::string& id = row[static_cast<size_t>(id_col)];
    if (!by_subject.emplace(id, std::move(raw)).second)
      throw Error(Errc::ParseError, source + ":" + std::to_string(table.line_numbers[r]) +
                                        ": duplicate subject_id '" + id + "'");
  }

  CovariateData data;
  for (const auto& name : names) {
    CovariateColumn col{name, categorical.count(name) > 0, {}};
    if (col.categorical) {
      std::set<std::string> levels;
      for (const auto& id : subject_order) {
        const auto it = by_subject.find(id);
        if (it != by_subject.end()) levels.insert(it->second.at(name));
      }
      col.levels.assign(levels.begin(), levels.end());
      if (col.levels.size() < 2)
        throw Error(Errc::InvalidInput, "categorical covariate '" + name + "' has a single level");
    }
    data.schema.columns.push_back(std::move(col));
  }

  data.sample.names = data.schema.encoded_names();
  data.sample.rows.resize(static_cast<Eigen::Index>(subject_order.size()),
                          static_cast<Eigen::Index>(data.sample.names.size()));
  for (size_t i = 0; i < subject_order.size(); ++i) {
    const auto it = by_subject.find(subject_order[i]);
    if (it == by_subject.end())
      throw Error(Errc::InvalidInput, source + ": no covariates for subject '" + subject_order[i] + "'");
    try {
      data.sample.rows.row(static_cast<Eigen::Index>(i)) = data.schema.encode(it->second).transpose();
    } catch (const Error& e) {
      rethrow_with_context(e, source + ": subject '" + subject_order[i] + "'");
    }
  }
  return data;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error(Errc::IoError, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "cannot rename onto '" + path.string() + "': " + ec.message());
}

namespace {

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd matrix_from(const json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (size_t i = 0; i < j.size(); ++i) {
    const Eigen::VectorXd row = vector_from(j[i]);
    if (row.size() != cols) throw Error(Errc::ParseError, "ragged matrix in model artifact");
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

}  // namespace

std::string serialize_model(const ModelArtifact& artifact) {
  const ResponseSet& r = responses_of(artifact.model);
  json j;
  j["format"] = "exceed-frechet-model";
  j["version"] = 1;
  json schema = json::array();
  for (const auto& c : artifact.schema.columns)
    schema.push_back({{"name", c.name}, {"categorical", c.categorical}, {"levels", c.levels}});
  j["schema"] = schema;
  j["prob_grid_size"] = r.prob_grid.size();
  j["thresholds"] = vector_json(r.thresholds.values());
  j["domain_length"] = r.domain_length;
  j["quantiles"] = matrix_json(r.quantiles);
  j["delta"] = artifact.delta;
  j["eps_tail"] = artifact.eps_tail;
  if (const auto* g = std::get_if<GlobalFrechetModel>(&artifact.model)) {
    j["kind"] = "global";
    j["covariates"] = matrix_json(g->covariates().rows);
    j["covariate_names"] = g->covariates().names;
  } else {
    const auto& l = std::get<LocalFrechetModel>(artifact.model);
    j["kind"] = "local";
    j["covariates"] = vector_json(l.xs());
    j["bandwidth"] = l.bandwidth();
    j["kernel"] = std::string(to_string(l.kernel().family));
  }
  return j.dump(1) + "\n";
}

ModelArtifact deserialize_model(const std::string& text, const std::string& source) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "exceed-frechet-model" || j.at("version") != 1)
      throw Error(Errc::ParseError, source + ": not an exceed model artifact");
    ModelArtifact a;
    for (const auto& c : j.at("schema"))
      a.schema.columns.push_back({c.at("name").get<std::string>(), c.at("categorical").get<bool>(),
                                  c.at("levels").get<std::vector<std::string>>()});
    const auto p = j.at("prob_grid_size").get<Eigen::Index>();
    ResponseSet r{ProbabilityGrid(p), matrix_from(j.at("quantiles"), p),
                  ThresholdGrid(vector_from(j.at("thresholds"))), j.at("domain_length").get<double>()};
    a.delta = j.at("delta").get<double>();
    a.eps_tail = j.at("eps_tail").get<double>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "global") {
      CovariateSample X;
      X.names = j.at("covariate_names").get<std::vector<std::string>>();
      X.rows = matrix_from(j.at("covariates"), static_cast<Eigen::Index>(X.names.size()));
      a.model = GlobalFrechetModel::fit(std::move(r), std::move(X));
    } else if (kind == "local") {
      a.model = LocalFrechetModel::fit(std::move(r), vector_from(j.at("covariates")),
                                       j.at("bandwidth").get<double>(),
                                       parse_kernel(j.at("kernel").get<std::string>()));
    } else {
      throw Error(Errc::ParseError, source + ": unknown model kind '" + kind + "'");
    }
    return a;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, source + ": " + e.what());
  }
}

void save_model(const fs::path& path, const ModelArtifact& artifact) {
  write_file_atomic(path, serialize_model(artifact));
}

ModelArtifact load_model(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str(), path.string());
}

}  // namespace exceed::io
