#pragma once

#include <cstdint>
#include <random>

namespace exceed {

/// Seeded 64-bit Mersenne Twister with its own normal sampler, so the
/// sequence does not depend on the standard library's distribution code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream `index` derived from `seed` (e.g. one per replicate).
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller; the paired draw is cached.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

double normal_cdf(double x);
double normal_pdf(double x);
/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

/// Draw from Normal(mu, sigma^2) restricted to [lo, hi] by inverting the CDF.
double truncated_normal(Rng& rng, double mu, double sigma, double lo, double hi);
double truncated_normal_mean(double mu, double sigma, double lo, double hi);

}  // namespace exceed
