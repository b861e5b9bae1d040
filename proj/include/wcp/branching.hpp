#ifndef WCP_BRANCHING_HPP
#define WCP_BRANCHING_HPP

#include <cmath>
#include <cstdint>

#include "wcp/contact.hpp"
#include "wcp/errors.hpp"

namespace wcp {

/// Galton-Watson process with Binomial(N, p) offspring.
struct BranchingModel {
  int n;
  double child_success;

  BranchingModel(int n_children, double p) : n(n_children), child_success(p) {
    require(n_children >= 1, "N must be >= 1");
    require(p >= 0.0 && p <= 1.0, "child success probability must lie in [0,1]");
  }

  double mean_offspring() const noexcept { return n * child_success; }
};

/// f(x) = ((1-p) + p x)^N.
inline double pgf(const BranchingModel& m, double x) {
  require(x >= 0.0 && x <= 1.0, "pgf argument must lie in [0,1]");
  return std::pow((1.0 - m.child_success) + m.child_success * x, m.n);
}

/// Smallest fixed point of the pgf in [0,1], by monotone iteration from 0.
inline double extinction_probability(const BranchingModel& m) {
  if (m.mean_offspring() <= 1.0) return 1.0;
  double x = 0.0;
  for (std::uint64_t k = 0; k < 100'000'000; ++k) {
    const double next = pgf(m, x);
    if (std::abs(next - x) < 1e-12) {
      x = next;
      break;
    }
    x = next;
  }
  // Newton on f(x) - x; f'(x) < 1 below the root so the step is well defined
  for (int k = 0; k < 3; ++k) {
    const double base = (1.0 - m.child_success) + m.child_success * x;
    const double slope = m.n * m.child_success * std::pow(base, m.n - 1);
    if (slope >= 1.0) break;
    const double next = x - (pgf(m, x) - x) / (slope - 1.0);
    if (!(next >= 0.0 && next < 1.0)) break;
    x = next;
  }
  return x;
}

struct SirRecord {
  std::size_t progeny_count = 0;  // |I_infinity| inside the window
  int reached_depth = 0;
  Status status = Status::extinct;
};

/// SIR epidemic on the window: infected vertices infect their sons at rate
/// lambda*rho and are removed for good at rate 1. In escape mode the run stops
/// at the first infection at depth D.
inline SirRecord simulate_sir(const SimulationConfig& cfg, const WeightField& field, Stream& stream,
                              EventEngine<SirRule>* engine = nullptr) {
  SimulationConfig run_cfg = cfg;
  run_cfg.horizon = std::numeric_limits<double>::infinity();
  EventEngine<SirRule> local;
  auto& e = engine ? *engine : local;
  const ContactOutcome out = e.run(run_cfg, field, stream);
  return {out.ever_infected, out.deepest, out.status};
}

}  // namespace wcp

#endif  // WCP_BRANCHING_HPP
