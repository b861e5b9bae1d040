#ifndef WCP_WEIGHTS_HPP
#define WCP_WEIGHTS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "wcp/errors.hpp"
#include "wcp/random.hpp"

namespace wcp {

namespace weight_kind {

struct Constant {
  double value;
};

struct Bernoulli {
  double p;
  double scale = 1.0;
};

struct Uniform {
  double a;
  double b;
};

// P(rho < x) = x^alpha on (0, 1).
struct PowerLaw {
  double alpha;
};

struct Discrete {
  std::vector<double> values;
  std::vector<double> probs;
};

}  // namespace weight_kind

/// Law of a single edge weight rho: bounded, nonnegative, immutable once built.
///
/// Construct through the named factories, which validate parameters and fill
/// in the derived moments: mean (E rho), bound (the essential supremum M) and
/// p_positive (P(rho > 0)).
class WeightDistribution {
 public:
  using Kind = std::variant<weight_kind::Constant, weight_kind::Bernoulli, weight_kind::Uniform,
                            weight_kind::PowerLaw, weight_kind::Discrete>;

  static WeightDistribution constant(double c) {
    require(std::isfinite(c) && c >= 0.0, "constant weight must be finite and >= 0");
    return WeightDistribution(weight_kind::Constant{c}, c, c, c > 0.0 ? 1.0 : 0.0);
  }

  static WeightDistribution bernoulli(double p, double scale = 1.0) {
    require(p >= 0.0 && p <= 1.0, "bernoulli p must lie in [0,1]");
    require(std::isfinite(scale) && scale > 0.0, "bernoulli scale must be finite and > 0");
    return WeightDistribution(weight_kind::Bernoulli{p, scale}, p * scale, scale, p);
  }

  static WeightDistribution uniform(double a, double b) {
    require(std::isfinite(a) && std::isfinite(b), "uniform bounds must be finite");
    require(a >= 0.0, "uniform lower bound must be >= 0");
    require(a <= b, "uniform requires a <= b");
    const double q = b > 0.0 ? 1.0 : 0.0;
    return WeightDistribution(weight_kind::Uniform{a, b}, 0.5 * (a + b), b, q);
  }

  static WeightDistribution power_law(double alpha) {
    require(std::isfinite(alpha) && alpha > 0.0, "power_law alpha must be > 0");
    return WeightDistribution(weight_kind::PowerLaw{alpha}, alpha / (alpha + 1.0), 1.0, 1.0);
  }

  static WeightDistribution discrete(std::vector<double> values, std::vector<double> probs) {
    require(!values.empty(), "discrete law needs at least one value");
    require(values.size() == probs.size(), "discrete values/probs length mismatch");
    for (double v : values) require(std::isfinite(v) && v >= 0.0, "discrete values must be finite and >= 0");
    for (double p : probs) require(std::isfinite(p) && p >= 0.0, "discrete probs must be >= 0");
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    require(std::abs(total - 1.0) <= 1e-12, "discrete probs must sum to 1 (within 1e-12)");
    for (double& p : probs) p /= total;

    double mean = 0.0, bound = 0.0, q = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      mean += values[i] * probs[i];
      if (probs[i] > 0.0) bound = std::max(bound, values[i]);
      if (values[i] > 0.0) q += probs[i];
    }
    return WeightDistribution(weight_kind::Discrete{std::move(values), std::move(probs)}, mean, bound,
                              std::min(q, 1.0));
  }

  const Kind& kind() const noexcept { return kind_; }
  std::string kind_name() const {
    static constexpr const char* names[] = {"constant", "bernoulli", "uniform", "power_law", "discrete"};
    return names[kind_.index()];
  }

  double mean() const noexcept { return mean_; }
  double bound() const noexcept { return bound_; }
  double p_positive() const noexcept { return p_positive_; }

  /// Draws one weight in [0, bound()].
  double sample(Stream& stream) const {
    return std::visit(
        [&](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, weight_kind::Constant>) {
            return k.value;
          } else if constexpr (std::is_same_v<T, weight_kind::Bernoulli>) {
            return stream.uniform() < k.p ? k.scale : 0.0;
          } else if constexpr (std::is_same_v<T, weight_kind::Uniform>) {
            return std::min(k.b, k.a + (k.b - k.a) * stream.uniform());
          } else if constexpr (std::is_same_v<T, weight_kind::PowerLaw>) {
            return std::pow(stream.uniform(), 1.0 / k.alpha);
          } else {
            const double u = stream.uniform();
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < k.values.size(); ++i) {
              acc += k.probs[i];
              if (u < acc) return k.values[i];
            }
            return k.values.back();
          }
        },
        kind_);
  }

  friend bool operator==(const WeightDistribution& a, const WeightDistribution& b) {
    return a.kind_.index() == b.kind_.index() && a.mean_ == b.mean_ && a.bound_ == b.bound_ &&
           a.p_positive_ == b.p_positive_;
  }

 private:
  WeightDistribution(Kind kind, double mean, double bound, double q)
      : kind_(std::move(kind)), mean_(mean), bound_(bound), p_positive_(q) {}

  Kind kind_;
  double mean_;
  double bound_;
  double p_positive_;
};

namespace detail {

template <class F>
double integrate_unit_tol(F f, double lo, double hi) {
  if (hi <= lo) return 0.0;
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-10, &err);
}

template <class F>
double integrate_endpoint(F f, double lo, double hi) {
  if (hi <= lo) return 0.0;
  thread_local boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, lo, hi, 1e-10);
}

}  // namespace detail

/// E[lambda*rho / (1 + lambda*rho)], the chance that an infected parent passes
/// the infection to one given son before recovering.
inline double expected_infection_ratio(const WeightDistribution& dist, double lambda) {
  require(lambda >= 0.0, "lambda must be >= 0");
  if (lambda == 0.0) return 0.0;
  auto ratio = [lambda](double w) { return lambda * w / (1.0 + lambda * w); };
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, weight_kind::Constant>) {
          return ratio(k.value);
        } else if constexpr (std::is_same_v<T, weight_kind::Bernoulli>) {
          return k.p * ratio(k.scale);
        } else if constexpr (std::is_same_v<T, weight_kind::Uniform>) {
          if (k.a == k.b) return ratio(k.a);
          const double knee = std::clamp(1.0 / lambda, k.a, k.b);
          return (detail::integrate_unit_tol(ratio, k.a, knee) + detail::integrate_unit_tol(ratio, knee, k.b)) /
                 (k.b - k.a);
        } else if constexpr (std::is_same_v<T, weight_kind::PowerLaw>) {
          // u = x^alpha turns the density into du; the integrand is then bounded
          // but not smooth at 0 for alpha < 1, which tanh-sinh tolerates
          const double inv = 1.0 / k.alpha;
          auto f = [inv, &ratio](double u) { return ratio(std::pow(u, inv)); };
          const double knee = std::pow(std::clamp(1.0 / lambda, 0.0, 1.0), k.alpha);
          if (knee > 0.0 && knee < 1.0)
            return detail::integrate_endpoint(f, 0.0, knee) + detail::integrate_endpoint(f, knee, 1.0);
          return detail::integrate_endpoint(f, 0.0, 1.0);
        } else {
          double s = 0.0;
          for (std::size_t i = 0; i < k.values.size(); ++i) s += k.probs[i] * ratio(k.values[i]);
          return s;
        }
      },
      dist.kind());
}

}  // namespace wcp

#endif  // WCP_WEIGHTS_HPP
