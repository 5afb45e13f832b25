#include "exceed/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "exceed/error.hpp"

namespace exceed {

RawTrajectory::RawTrajectory(std::string subject_id, Eigen::VectorXd times,
                             Eigen::VectorXd values, Domain domain)
    : subject_id_(std::move(subject_id)),
      times_(std::move(times)),
      values_(std::move(values)),
      domain_(domain) {
  const auto where = [&] { return "subject '" + subject_id_ + "'"; };
  if (!(domain_.end > domain_.start))
    throw Error(Errc::InvalidInput, where() + ": empty time domain");
  if (times_.size() != values_.size())
    throw Error(Errc::LengthMismatch, where() + ": times and values differ in length");
  if (!times_.allFinite() || !values_.allFinite())
    throw Error(Errc::InvalidInput, where() + ": non-finite observation");
  for (Eigen::Index j = 0; j < times_.size(); ++j) {
    if (!domain_.contains(times_[j]))
      throw Error(Errc::InvalidInput, where() + ": time outside the domain");
    if (j > 0 && times_[j] < times_[j - 1])
      throw Error(Errc::InvalidInput, where() + ": times not sorted");
  }
  if (times_.size() < 2 || times_[0] == times_[times_.size() - 1])
    throw Error(Errc::InsufficientData, where() + ": needs two distinct observation times");
}

void SmoothingConfig::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw Error(Errc::ConfigError, "bandwidth must be positive");
  if (!(ridge_epsilon > 0.0))
    throw Error(Errc::ConfigError, "ridge_epsilon must be positive");
  if (max_bandwidth_expansions < 0)
    throw Error(Errc::ConfigError, "max_bandwidth_expansions must be nonnegative");
}

double SmoothedTrajectory::operator()(double t) const {
  const Eigen::Index m = grid.size();
  if (t <= grid[0]) return values[0];
  if (t >= grid[m - 1]) return values[m - 1];
  const auto* it = std::upper_bound(grid.data(), grid.data() + m, t);
  const Eigen::Index k = (it - grid.data()) - 1;
  const double w = (t - grid[k]) / (grid[k + 1] - grid[k]);
  return values[k] + w * (values[k + 1] - values[k]);
}

Eigen::VectorXd equispaced(double lo, double hi, Eigen::Index count) {
  Eigen::VectorXd out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (Eigen::Index k = 0; k < count; ++k) out[k] = lo + step * static_cast<double>(k);
  out[count - 1] = hi;
  return out;
}

namespace detail {

double local_linear_fit(const RawTrajectory& traj, double t, const SmoothingConfig& cfg,
                        Eigen::Index skip) {
  const auto& ts = traj.times();
  const auto& zs = traj.values();
  const double* begin = ts.data();
  const double* end = ts.data() + ts.size();

  bool singular_seen = false;
  double h = cfg.bandwidth;
  for (int expansion = 0; expansion <= cfg.max_bandwidth_expansions; ++expansion, h *= 1.5) {
    const Eigen::Index lo = std::lower_bound(begin, end, t - h) - begin;
    const Eigen::Index hi = std::upper_bound(begin, end, t + h) - begin;

    double p0 = 0, p1 = 0, p2 = 0, q0 = 0, q1 = 0;
    double first_time = std::numeric_limits<double>::quiet_NaN();
    bool distinct = false;
    for (Eigen::Index j = lo; j < hi; ++j) {
      if (j == skip) continue;
      const double d = (ts[j] - t) / h;
      const double w = cfg.kernel(d);
      if (w <= 0.0) continue;
      if (std::isnan(first_time))
        first_time = ts[j];
      else if (ts[j] != first_time)
        distinct = true;
      const double wd = w * d;
      p0 += w;
      p1 += wd;
      p2 += wd * d;
      q0 += w * zs[j];
      q1 += wd * zs[j];
    }
    if (!distinct) continue;

    const double denom = p0 * p2 - p1 * p1;
    if (denom / (p0 * p0) < cfg.ridge_epsilon) {
      singular_seen = true;
      continue;
    }
    return (q0 * p2 - q1 * p1) / denom;
  }

  std::ostringstream msg;
  msg << "subject '" << traj.subject_id() << "' at t=" << t << ": ";
  if (singular_seen) {
    msg << "local design singular after " << cfg.max_bandwidth_expansions
        << " bandwidth expansions";
    throw Error(Errc::SingularLocalDesign, msg.str());
  }
  msg << "fewer than two distinct observation times within the expanded window";
  throw Error(Errc::InsufficientLocalData, msg.str());
}

}  // namespace detail

double local_linear_fit(const RawTrajectory& traj, double t, const SmoothingConfig& cfg) {
  cfg.validate();
  if (!traj.domain().contains(t))
    throw Error(Errc::InvalidInput, "evaluation time outside the domain");
  return detail::local_linear_fit(traj, t, cfg, -1);
}

SmoothedTrajectory smooth_on_grid(const RawTrajectory& traj, Eigen::Index grid_size,
                                  const SmoothingConfig& cfg) {
  if (grid_size < 2) throw Error(Errc::InvalidCount, "smoothing grid needs at least 2 points");
  cfg.validate();
  SmoothedTrajectory out;
  out.grid = equispaced(traj.domain().start, traj.domain().end, grid_size);
  out.values.resize(grid_size);
  for (Eigen::Index k = 0; k < grid_size; ++k) {
    try {
      out.values[k] = detail::local_linear_fit(traj, out.grid[k], cfg, -1);
    } catch (const Error& e) {
      std::ostringstream ctx;
      ctx << "grid point " << k;
      rethrow_with_context(e, ctx.str());
    }
  }
  return out;
}

double default_bandwidth(long N, long n, double domain_length) {
  if (N < 2 || n < 1) throw Error(Errc::InvalidCount, "default_bandwidth needs N >= 2, n >= 1");
  if (!(domain_length > 0.0)) throw Error(Errc::InvalidInput, "domain length must be positive");
  const double Nd = static_cast<double>(N);
  return domain_length * std::pow(std::log(Nd * static_cast<double>(n)) / Nd, 0.2);
}

double linear_rate_bandwidth(long N, long n, double domain_length) {
  if (N < 2 || n < 1) throw Error(Errc::InvalidCount, "bandwidth rule needs N >= 2, n >= 1");
  if (!(domain_length > 0.0)) throw Error(Errc::InvalidInput, "domain length must be positive");
  const double Nd = static_cast<double>(N);
  return domain_length * std::log(Nd * static_cast<double>(n)) / Nd;
}

std::vector<double> default_cv_candidates(long N, double domain_length) {
  if (N < 5) throw Error(Errc::InvalidCount, "default candidates need N >= 5");
  const double lo = std::log(2.0 * domain_length / static_cast<double>(N));
  const double hi = std::log(0.5 * domain_length);
  std::vector<double> out;
  for (int k = 0; k < 10; ++k) out.push_back(std::exp(lo + (hi - lo) * k / 9.0));
  return out;
}

double cv_bandwidth(const RawTrajectory& traj, std::span<const double> candidates,
                    const SmoothingConfig& cfg_base) {
  if (candidates.empty()) throw Error(Errc::InsufficientData, "no candidate bandwidths");
  if (traj.size() < 10)
    throw Error(Errc::InsufficientData, "cross-validation needs at least 10 observations");

  const auto& ts = traj.times();
  const auto& zs = traj.values();
  const double tie_tol = 1e-12 * (1.0 + zs.squaredNorm() / static_cast<double>(zs.size()));

  double best_h = 0.0;
  double best_score = std::numeric_limits<double>::infinity();
  for (double h : candidates) {
    if (!(h > 0.0)) throw Error(Errc::ConfigError, "candidate bandwidths must be positive");
    SmoothingConfig cfg = cfg_base;
    cfg.bandwidth = h;
    double score = 0.0;
    try {
      for (Eigen::Index j = 0; j < ts.size(); ++j) {
        const double r = zs[j] - detail::local_linear_fit(traj, ts[j], cfg, j);
        score += r * r;
      }
    } catch (const Error&) {
      continue;
    }
    score /= static_cast<double>(ts.size());
    if (std::abs(score - best_score) <= tie_tol) {
      best_h = std::max(best_h, h);
      best_score = std::min(best_score, score);
    } else if (score < best_score) {
      best_h = h;
      best_score = score;
    }
  }
  if (!std::isfinite(best_score))
    throw Error(Errc::InsufficientData, "every candidate bandwidth failed leave-one-out fitting");
  return best_h;
}

}  // namespace exceed
