#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "exceed/csv.hpp"
#include "exceed/error.hpp"
#include "exceed/io.hpp"

using namespace exceed;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "exceed_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

csv::Table parse(const std::string& text) {
  std::istringstream in(text);
  return csv::read(in, "mem");
}

}  // namespace

TEST_CASE("csv reading") {
  const auto t = parse("\xEF\xBB\xBF" "a,b,c\r\n1,\"x,y\",\"say \"\"hi\"\"\"\r\n\r\n2,\"multi\nline\",3\n");
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x,y");
  CHECK(t.rows[0][2] == "say \"hi\"");
  CHECK(t.rows[1][1] == "multi\nline");
  CHECK(t.line_numbers == std::vector<long>{2, 4});
  CHECK(t.column("c") == 2);
  CHECK(t.column("zzz") == -1);

  try {
    parse("a,b\n1,2\n3\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ParseError);
    CHECK(std::string(e.what()).find("mem:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("a,b\n\"open,2\n"), Error);
  CHECK_THROWS_AS(parse(""), Error);
}

TEST_CASE("csv writing quotes only when needed") {
  std::ostringstream out;
  csv::Writer w(out);
  w.row({"plain", "with,comma", "with \"quote\"", "line\nbreak"});
  CHECK(out.str() == "plain,\"with,comma\",\"with \"\"quote\"\"\",\"line\nbreak\"\r\n");
  const auto back = parse(out.str());
  CHECK(back.header == std::vector<std::string>{"plain", "with,comma", "with \"quote\"", "line\nbreak"});
}

TEST_CASE("numbers survive a write-read round trip exactly") {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int i = 0; i < 20000; ++i) {
    double v;
    const std::uint64_t b = bits(gen);
    std::memcpy(&v, &b, sizeof v);
    if (!std::isfinite(v)) continue;
    CHECK(csv::parse_double(csv::format_double(v), "x") == v);
  }
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0})
    CHECK(csv::parse_double(csv::format_double(v), "x") == v);
  CHECK(csv::format_double(0.5) == "0.5");
  CHECK(csv::parse_double(" +1.25 ", "x") == 1.25);
  CHECK_THROWS_AS(csv::parse_double("1,5", "x"), Error);
  CHECK_THROWS_AS(csv::parse_double("nan", "x"), Error);
  CHECK_THROWS_AS(csv::parse_double("", "x"), Error);
}

TEST_CASE("long-format trajectories") {
  const auto p = scratch("long.csv");
  write(p, "subject_id,t,z\nb,0.5,2\na,0.0,1\nb,0.0,5\na,1.0,3\nb,1.0,4\na,0.5,2\n");
  const auto trajs = io::read_trajectories(p);
  REQUIRE(trajs.size() == 2);
  CHECK(trajs[0].subject_id() == "b");
  CHECK(trajs[0].times() == Eigen::Vector3d(0, 0.5, 1));
  CHECK(trajs[0].values() == Eigen::Vector3d(5, 2, 4));
  CHECK(trajs[1].domain().start == 0.0);
  CHECK(trajs[1].domain().end == 1.0);

  const auto wide = io::read_trajectories(p, Domain{-1.0, 2.0});
  CHECK(wide[0].domain().length() == 3.0);

  write(p, "subject_id,t,z\na,0,1\na,oops,2\n");
  try {
    io::read_trajectories(p);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ParseError);
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  write(p, "id,t,z\na,0,1\n");
  CHECK_THROWS_AS(io::read_trajectories(p), Error);
  write(p, "subject_id,t,z\na,0,1\nb,0,1\nb,1,2\n");
  try {
    io::read_trajectories(p);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InsufficientData);
  }
  CHECK_THROWS_AS(io::read_trajectories(scratch("missing.csv")), Error);
}

TEST_CASE("covariates with categorical columns") {
  const auto p = scratch("cov.csv");
  write(p, "subject_id,age,region\ns1,30,north\ns2,41,south\ns3,52,east\ns4,60,north\nextra,1,west\n");
  const std::vector<std::string> order{"s2", "s1", "s3", "s4"};
  const auto data = io::read_covariates(p, order, {}, {"region"});
  CHECK(data.sample.names == std::vector<std::string>{"age", "region=north", "region=south"});
  REQUIRE(data.sample.rows.rows() == 4);
  CHECK(data.sample.rows.row(0) == Eigen::RowVector3d(41, 0, 1));
  CHECK(data.sample.rows.row(2) == Eigen::RowVector3d(52, 0, 0));
  CHECK(data.schema.encode({{"age", "10"}, {"region", "north"}}) == Eigen::Vector3d(10, 1, 0));
  CHECK_THROWS_AS(data.schema.encode({{"age", "10"}, {"region", "west"}}), Error);
  CHECK_THROWS_AS(data.schema.encode({{"age", "10"}}), Error);

  const auto only_age = io::read_covariates(p, order, {"age"}, {});
  CHECK(only_age.sample.p() == 1);
  CHECK_THROWS_AS(io::read_covariates(p, {"s1", "nobody"}, {}, {"region"}), Error);
  CHECK_THROWS_AS(io::read_covariates(p, order, {"age"}, {"region"}), Error);
}

TEST_CASE("atomic writes leave no temporary behind") {
  const auto p = scratch("atomic.txt");
  io::write_file_atomic(p, "first");
  io::write_file_atomic(p, "second");
  std::ifstream in(p);
  std::string s;
  in >> s;
  CHECK(s == "second");
  CHECK_FALSE(fs::exists(p.string() + ".tmp"));
  CHECK_THROWS_AS(io::write_file_atomic(scratch("no/such/dir/x.txt"), "x"), Error);
}

TEST_CASE("model artifacts round trip bit-exactly") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> N01;
  ResponseSet r{ProbabilityGrid(21), Eigen::MatrixXd(8, 21), ThresholdGrid::equispaced(-3, 3, 41), 92.0};
  for (Eigen::Index i = 0; i < 8; ++i) {
    double acc = -2 + 0.1 * N01(gen);
    for (Eigen::Index k = 0; k < 21; ++k) r.quantiles(i, k) = acc += 0.2 * std::abs(N01(gen)) / 3.0;
  }
  CovariateSample X{Eigen::MatrixXd(8, 2), {"age", "g=b"}};
  for (Eigen::Index i = 0; i < 8; ++i) X.rows.row(i) << N01(gen) * 1e-3 + 1.0 / 3.0, i % 2;
  io::CovariateSchema schema{{{"age", false, {}}, {"g", true, {"a", "b"}}}};

  const io::ModelArtifact global{GlobalFrechetModel::fit(r, X), schema, 0.3, 0.05};
  const auto path = scratch("model.json");
  io::save_model(path, global);
  const auto back = io::load_model(path);
  const auto& g0 = std::get<GlobalFrechetModel>(global.model);
  const auto& g1 = std::get<GlobalFrechetModel>(back.model);
  CHECK(g1.covariates().rows == g0.covariates().rows);
  CHECK(g1.responses().quantiles == g0.responses().quantiles);
  CHECK(g1.responses().thresholds == g0.responses().thresholds);
  CHECK(g1.cov_x() == g0.cov_x());
  CHECK(back.delta == 0.3);
  CHECK(back.schema.encoded_names() == schema.encoded_names());
  const Eigen::Vector2d q(0.4, 1.0);
  CHECK(predict_quantile(back.model, q).q_values == predict_quantile(global.model, q).q_values);
  CHECK(io::serialize_model(back) == io::serialize_model(global));

  io::CovariateSchema one{{{"x", false, {}}}};
  const io::ModelArtifact local{LocalFrechetModel::fit(r, X.rows.col(0), 0.01, KernelSpec{KernelFamily::quartic}),
                                one, 0.2, 0.1};
  const auto l1 = io::deserialize_model(io::serialize_model(local), "mem");
  const auto& lm = std::get<LocalFrechetModel>(l1.model);
  CHECK(lm.kernel().family == KernelFamily::quartic);
  CHECK(lm.bandwidth() == 0.01);
  CHECK(lm.xs() == X.rows.col(0));

  CHECK_THROWS_AS(io::deserialize_model("{\"format\":\"other\"}", "mem"), Error);
  CHECK_THROWS_AS(io::deserialize_model("not json", "mem"), Error);
}
