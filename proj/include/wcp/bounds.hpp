#ifndef WCP_BOUNDS_HPP
#define WCP_BOUNDS_HPP

#include <cmath>
#include <limits>
#include <optional>

#include "wcp/branching.hpp"
#include "wcp/errors.hpp"
#include "wcp/weights.hpp"

namespace wcp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Smallest lambda with N * E[lambda rho/(1 + lambda rho)] > 1, located by
/// bisection. Beyond it the SIR lower bound is supercritical, so lambda_c is
/// at most this value. Infinite when N * P(rho > 0) <= 1.
inline double lemma31_upper(const WeightDistribution& dist, int n, double tol = 1e-12) {
  require(tol > 0.0, "tolerance must be > 0");
  require(n >= 1, "N must be >= 1");
  if (n * dist.p_positive() <= 1.0 + 1e-12) return kInfinity;
  auto criterion = [&](double lambda) { return n * expected_infection_ratio(dist, lambda) > 1.0; };
  double lo = 0.0, hi = 1.0;
  while (!criterion(hi)) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return kInfinity;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (criterion(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// (N E rho + M^2 / E rho)^{-1}.
inline double lambda_e_lower(const WeightDistribution& dist, int n) {
  require(n >= 1, "N must be >= 1");
  require(dist.mean() > 0.0, "lower bound undefined when E rho = 0");
  const double m = dist.bound();
  return 1.0 / (n * dist.mean() + m * m / dist.mean());
}

/// Coefficient of t in the exponent of the decay envelope.
inline double envelope_slope(const WeightDistribution& dist, int n, double lambda) {
  require(dist.mean() > 0.0, "envelope undefined when E rho = 0");
  const double m = dist.bound();
  return lambda * (n * dist.mean() + m * m / dist.mean()) - 1.0;
}

/// exp{t [lambda (N E rho + M^2/E rho) - 1]}, an upper bound on the annealed
/// survival probability P(C_t != empty) from the root.
inline double decay_envelope(const WeightDistribution& dist, int n, double lambda, double t) {
  require(t >= 0.0, "t must be >= 0");
  if (t == 0.0) return 1.0;
  return std::exp(t * envelope_slope(dist, n, lambda));
}

struct Interval {
  double lo;
  double hi;

  double width() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  bool intersects(const Interval& o) const noexcept { return lo <= o.hi && o.lo <= hi; }
};

/// [N lambda_e_lower, N lemma31_upper]; the upper end is infinite when the
/// SIR bound is.
inline Interval limit_bracket(const WeightDistribution& dist, int n, double tol = 1e-12) {
  return {n * lambda_e_lower(dist, n), n * lemma31_upper(dist, n, tol)};
}

struct BoundsReport {
  int n;
  double lambda_c_upper;
  double lambda_e_lower;
  Interval bracket;
  double limit_target;             // 1 / E rho
  double open_cluster_extinction;  // extinction of the B(N, q) cluster tree
  std::optional<double> lambda;    // evaluation point for the fields below
  std::optional<double> envelope_slope;
  std::optional<double> sir_child_success;
  std::optional<double> sir_mean_offspring;
};

inline BoundsReport bounds_report(const WeightDistribution& dist, int n, std::optional<double> lambda = {},
                                  double tol = 1e-12) {
  BoundsReport r{};
  r.n = n;
  r.lambda_c_upper = lemma31_upper(dist, n, tol);
  r.lambda_e_lower = lambda_e_lower(dist, n);
  r.bracket = {n * r.lambda_e_lower, n * r.lambda_c_upper};
  r.limit_target = 1.0 / dist.mean();
  r.open_cluster_extinction = extinction_probability(BranchingModel(n, dist.p_positive()));
  if (lambda) {
    r.lambda = lambda;
    r.envelope_slope = envelope_slope(dist, n, *lambda);
    r.sir_child_success = expected_infection_ratio(dist, *lambda);
    r.sir_mean_offspring = n * *r.sir_child_success;
  }
  return r;
}

}  // namespace wcp

#endif  // WCP_BOUNDS_HPP
