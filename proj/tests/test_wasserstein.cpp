#include <doctest.h>

#include <random>

#include "exceed/error.hpp"
#include "exceed/wasserstein.hpp"
#include "oracles.hpp"

using namespace exceed;

namespace {

QuantileProfile random_quantile(std::mt19937_64& gen, Eigen::Index P) {
  std::exponential_distribution<double> E(1.0);
  std::normal_distribution<double> N01;
  QuantileProfile q{ProbabilityGrid(P), Eigen::VectorXd(P)};
  double acc = N01(gen);
  for (Eigen::Index k = 0; k < P; ++k) q.q_values[k] = (acc += E(gen) / static_cast<double>(P));
  return q;
}

double l2(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm(); }

}  // namespace

TEST_CASE("trapezoid and pava primitives") {
  CHECK(trapezoid(Eigen::VectorXd::Ones(11), 0.1) == doctest::Approx(1.0));
  CHECK(trapezoid(Eigen::VectorXf::LinSpaced(3, 0, 2), 0.5f) == doctest::Approx(1.0f));
  Eigen::Vector2d y(2, 1);
  CHECK(pava(y) == Eigen::Vector2d(1.5, 1.5));
  Eigen::VectorXd z(5);
  z << 1, 3, 2, 2, 5;
  Eigen::VectorXd expect(5);
  expect << 1, 7.0 / 3, 7.0 / 3, 7.0 / 3, 5;
  CHECK((pava(z) - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("distance on simple profiles") {
  const ProbabilityGrid g(201);
  const QuantileProfile a{g, g.values()};
  CHECK(wasserstein_distance(a, a) == 0.0);
  const QuantileProfile b{g, 2.0 * g.values()};
  CHECK(std::abs(wasserstein_distance(a, b) - 0.577350269189625764509148780502) <= 1e-4);
  for (double c : {-3.0, 0.25, 7.5}) {
    const QuantileProfile s{g, g.values().array() + c};
    CHECK(std::abs(wasserstein_distance(a, s) - std::abs(c)) <= 1e-12);
  }
}

TEST_CASE("metric axioms on random profiles") {
  std::mt19937_64 gen(21);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto a = random_quantile(gen, 101), b = random_quantile(gen, 101), c = random_quantile(gen, 101);
    const double ab = wasserstein_distance(a, b);
    CHECK(std::abs(ab - wasserstein_distance(b, a)) <= 1e-12);
    CHECK(ab <= wasserstein_distance(a, c) + wasserstein_distance(c, b) + 1e-10);
    CHECK(wasserstein_distance(a, a) == 0.0);
  }
}

TEST_CASE("resampling onto a common grid") {
  const QuantileProfile coarse{ProbabilityGrid(101), ProbabilityGrid(101).values().array().square()};
  const QuantileProfile fine{ProbabilityGrid(201), ProbabilityGrid(201).values().array().square()};
  const QuantileProfile zero{ProbabilityGrid(201), Eigen::VectorXd::Zero(201)};
  CHECK(std::abs(wasserstein_distance(coarse, zero) - wasserstein_distance(fine, zero)) <= 1e-3);
  CHECK(wasserstein_distance(coarse, fine) < 1e-4);
  try {
    wasserstein_distance(coarse, fine, false);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::GridMismatch);
  }
}

TEST_CASE("weighted quantile means") {
  std::mt19937_64 gen(22);
  const std::vector<QuantileProfile> one{random_quantile(gen, 51)};
  const std::vector<double> w1{1.0};
  CHECK(weighted_quantile_mean(one, w1).values == one[0].q_values);

  const std::vector<QuantileProfile> two{random_quantile(gen, 51), random_quantile(gen, 51)};
  const std::vector<double> w2{2.0, 0.0};
  CHECK((weighted_quantile_mean(two, w2).values - two[0].q_values).cwiseAbs().maxCoeff() < 1e-15);

  std::vector<QuantileProfile> many;
  for (int i = 0; i < 7; ++i) many.push_back(random_quantile(gen, 51));
  const std::vector<double> ones(7, 1.0);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(51);
  for (const auto& q : many)
    for (Eigen::Index k = 0; k < 51; ++k) avg[k] += q.q_values[k] / 7.0;
  CHECK((weighted_quantile_mean(many, ones).values - avg).cwiseAbs().maxCoeff() < 1e-12);

  const std::vector<double> short_w{1.0};
  CHECK_THROWS_AS(weighted_quantile_mean(two, short_w), Error);
}

TEST_CASE("projection equals exhaustive partition search") {
  std::mt19937_64 gen(23);
  std::normal_distribution<double> N01;
  std::uniform_int_distribution<int> len(3, 6);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = len(gen);
    RawQuantileCandidate c{ProbabilityGrid(n), Eigen::VectorXd(n)};
    for (auto& v : c.values) v = N01(gen);
    const double lo = -0.5 - std::abs(N01(gen)), hi = 0.5 + std::abs(N01(gen));
    const Eigen::VectorXd expect = oracle::partition_projection(c.values, lo, hi);
    const auto got = project_to_quantile_space(c, lo, hi);
    CHECK((got.q_values - expect).cwiseAbs().maxCoeff() <= 1e-8);
  }
  for (int n : {1, 2}) {
    Eigen::VectorXd y(n);
    for (auto& v : y) v = N01(gen);
    const Eigen::VectorXd got = pava(y).cwiseMax(-0.3).cwiseMin(0.3);
    CHECK((got - oracle::partition_projection(y, -0.3, 0.3)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("projection examples and properties") {
  RawQuantileCandidate c{ProbabilityGrid(3), Eigen::Vector3d(2, 1, 2.5)};
  CHECK(project_to_quantile_space(c, 0, 3).q_values == Eigen::Vector3d(1.5, 1.5, 2.5));

  std::mt19937_64 gen(24);
  std::normal_distribution<double> N01;
  std::uniform_real_distribution<double> U(-2, 2);
  const double lo = -1.5, hi = 1.5;
  for (int rep = 0; rep < 200; ++rep) {
    RawQuantileCandidate a{ProbabilityGrid(41), Eigen::VectorXd(41)};
    RawQuantileCandidate b = a;
    for (auto& v : a.values) v = 1.2 * N01(gen);
    for (auto& v : b.values) v = 1.2 * N01(gen);
    const auto pa = project_to_quantile_space(a, lo, hi);
    const auto pb = project_to_quantile_space(b, lo, hi);

    CHECK(l2(pa.q_values, pb.q_values) <= l2(a.values, b.values) + 1e-10);
    RawQuantileCandidate again{a.prob_grid, pa.q_values};
    CHECK(project_to_quantile_space(again, lo, hi).q_values == pa.q_values);
    CHECK(monotonicity_violation(pa.q_values) == 0.0);
    CHECK(pa.q_values.minCoeff() >= lo);
    CHECK(pa.q_values.maxCoeff() <= hi);

    if (rep < 20) {
      const double best = l2(a.values, pa.q_values);
      for (int k = 0; k < 100; ++k) {
        Eigen::VectorXd w(41);
        for (auto& v : w) v = U(gen);
        std::sort(w.data(), w.data() + 41);
        w = w.cwiseMax(lo).cwiseMin(hi);
        CHECK(best <= l2(a.values, w) + 1e-12);
      }
    }
  }
}

TEST_CASE("monotonicity violation") {
  CHECK(monotonicity_violation(Eigen::Vector3d(0, 1, 2)) == 0.0);
  CHECK(monotonicity_violation(Eigen::Vector4d(0, 3, 1, 2.5)) == 2.0);
}

TEST_CASE("large corrections are reported, small ones are not") {
  std::vector<std::string> seen;
  const auto previous = set_diagnostic_sink([&](std::string_view m) { seen.emplace_back(m); });
  RawQuantileCandidate small{ProbabilityGrid(3), Eigen::Vector3d(0, 1.05, 1)};
  project_to_quantile_space(small, 0, 2);
  CHECK(seen.empty());
  RawQuantileCandidate big{ProbabilityGrid(3), Eigen::Vector3d(0, 1.5, 1)};
  project_to_quantile_space(big, 0, 2);
  CHECK(seen.size() == 1);
  set_diagnostic_sink(previous);
}
