#ifndef WCP_RWALK_HPP
#define WCP_RWALK_HPP

#include <cmath>
#include <vector>

#include "wcp/errors.hpp"

namespace wcp {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Law of the depth of simple random walk on the tree after n steps.
///
/// Depth is a reflected birth-death chain: 0 -> 1 surely; from k >= 1 up with
/// probability N/(N+1), down with 1/(N+1).
struct DistanceChain {
  int n_children;
  std::vector<double> probs;  // probs[k] = P(depth == k)

  double total() const {
    CompensatedSum s;
    for (double p : probs) s.add(p);
    return s.value();
  }
};

inline DistanceChain depth_distribution(int n_children, int steps) {
  require(n_children >= 1, "N must be >= 1");
  require(steps >= 0, "step count must be >= 0");
  const double up = static_cast<double>(n_children) / (n_children + 1);
  const double down = 1.0 / (n_children + 1);
  std::vector<double> cur{1.0}, next;
  for (int s = 0; s < steps; ++s) {
    next.assign(cur.size() + 1, 0.0);
    next[1] += cur[0];
    for (std::size_t k = 1; k < cur.size(); ++k) {
      next[k + 1] += cur[k] * up;
      next[k - 1] += cur[k] * down;
    }
    cur.swap(next);
  }
  return {n_children, std::move(cur)};
}

inline void check_walk_args(int n_children, int steps, double x) {
  require(n_children >= 1, "N must be >= 1");
  require(steps >= 0, "step count must be >= 0");
  require(x > 0.0 && x <= 1.0, "x must lie in (0,1]");
}

/// E[x^{depth(S_n)}] for the walk started at the root.
inline double depth_functional(int n_children, int steps, double x) {
  check_walk_args(n_children, steps, x);
  const auto chain = depth_distribution(n_children, steps);
  CompensatedSum s;
  double power = 1.0;
  for (double p : chain.probs) {
    s.add(p * power);
    power *= x;
  }
  return s.value();
}

/// [N x/(N+1) + 1/((N+1) x)]^n, which dominates depth_functional.
inline double lemma41_bound(int n_children, int steps, double x) {
  check_walk_args(n_children, steps, x);
  const double base = n_children * x / (n_children + 1) + 1.0 / ((n_children + 1) * x);
  return std::pow(base, steps);
}

}  // namespace wcp

#endif  // WCP_RWALK_HPP
