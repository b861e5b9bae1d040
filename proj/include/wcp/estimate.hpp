#ifndef WCP_ESTIMATE_HPP
#define WCP_ESTIMATE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "wcp/bounds.hpp"
#include "wcp/contact.hpp"
#include "wcp/coupled.hpp"
#include "wcp/parallel.hpp"
#include "wcp/tree.hpp"

namespace wcp {

namespace stream_tag {
inline constexpr std::uint64_t kField = 0x6669656c64ULL;
inline constexpr std::uint64_t kRun = 0x72756eULL;
inline constexpr std::uint64_t kClock = 0x636c6f636bULL;
inline constexpr std::uint64_t kProbe = 0x70726f6265ULL;
inline constexpr std::uint64_t kDecay = 0x6465636179ULL;
}  // namespace stream_tag

inline double binomial_se(double p, std::size_t n) {
  return n ? std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0;
}

/// Weight field used by replicate `rep` of an experiment. Quenched runs share
/// the config's field; annealed runs get a fresh one per replicate.
inline WeightField replicate_field(const SimulationConfig& cfg, std::uint64_t seed, std::uint64_t lambda_index,
                                   std::uint64_t rep) {
  if (cfg.mode == Mode::quenched) return WeightField(cfg.master_seed, cfg.dist, cfg.n);
  const StreamKey k = make_key(seed, {stream_tag::kField, lambda_index, rep});
  return WeightField(k.hi ^ k.lo, cfg.dist, cfg.n);
}

struct SurvivalPoint {
  double lambda = 0.0;
  Boundary boundary = Boundary::absorbing;
  double p_hat = 0.0;
  double se = 0.0;
  std::size_t reps = 0;
  std::size_t survivors = 0;
  std::size_t escapes = 0;
  std::size_t capacity_errors = 0;
};

/// Survival-to-horizon estimates on a lambda grid for both boundary modes.
struct SurvivalCurve {
  std::vector<double> grid;
  std::vector<SurvivalPoint> absorbing;
  std::vector<SurvivalPoint> escape;
  bool crn = false;
  // With crn, outcome[rep][lambda index] for each boundary mode.
  std::vector<std::vector<std::uint8_t>> outcomes_absorbing;
  std::vector<std::vector<std::uint8_t>> outcomes_escape;
  std::uint64_t containment_violations = 0;
};

namespace detail {

inline void tally(SurvivalPoint& p, const ContactOutcome& o) {
  ++p.reps;
  if (o.survived()) ++p.survivors;
  if (o.status == Status::escaped) ++p.escapes;
  if (o.status == Status::capacity_exceeded) ++p.capacity_errors;
}

inline void finalize(SurvivalPoint& p) {
  p.p_hat = p.reps ? static_cast<double>(p.survivors) / static_cast<double>(p.reps) : 0.0;
  p.se = binomial_se(p.p_hat, p.reps);
}

}  // namespace detail

/// Survival proxy at one lambda: runs reps root-started replicates in both
/// boundary modes on shared streams, so escape-mode survival dominates
/// absorbing-mode survival replicate by replicate.
inline std::pair<SurvivalPoint, SurvivalPoint> survival_point(const SimulationConfig& base, double lambda,
                                                             std::size_t reps, std::uint64_t seed,
                                                             std::uint64_t lambda_index, unsigned threads = 1,
                                                             bool run_absorbing = true, bool run_escape = true) {
  SimulationConfig abs_cfg = base, esc_cfg = base;
  abs_cfg.lambda = esc_cfg.lambda = lambda;
  abs_cfg.boundary = Boundary::absorbing;
  esc_cfg.boundary = Boundary::escape;

  std::vector<ContactOutcome> abs_out(run_absorbing ? reps : 0), esc_out(run_escape ? reps : 0);
  std::vector<EventEngine<ContactRule>> engines(std::max(1u, threads));
  parallel_for(reps, threads, [&](std::size_t i, unsigned w) {
    const WeightField field = replicate_field(base, seed, lambda_index, i);
    const StreamKey key = make_key(seed, {stream_tag::kRun, lambda_index, i});
    if (run_absorbing) {
      Stream s(key);
      abs_out[i] = engines[w].run(abs_cfg, field, s);
    }
    if (run_escape) {
      Stream s(key);
      esc_out[i] = engines[w].run(esc_cfg, field, s);
    }
  });

  SurvivalPoint a{lambda, Boundary::absorbing}, e{lambda, Boundary::escape};
  for (const auto& o : abs_out) detail::tally(a, o);
  for (const auto& o : esc_out) detail::tally(e, o);
  detail::finalize(a);
  detail::finalize(e);
  return {a, e};
}

/// Survival curve over an ascending lambda grid. With crn the whole grid is
/// driven by one graphical representation per replicate (CoupledEngine), so
/// each replicate's survival outcomes are nondecreasing in lambda.
inline SurvivalCurve survival_curve(const SimulationConfig& base, const std::vector<double>& grid,
                                    std::size_t reps, bool crn, std::uint64_t seed, unsigned threads = 1) {
  require(reps >= 1, "reps must be >= 1");
  require(!grid.empty(), "lambda grid must be nonempty");
  require(std::is_sorted(grid.begin(), grid.end()), "lambda grid must be sorted ascending");
  for (double l : grid) require(std::isfinite(l) && l >= 0.0, "lambda grid values must be finite and >= 0");

  SurvivalCurve curve;
  curve.grid = grid;
  curve.crn = crn;

  if (!crn) {
    for (std::size_t li = 0; li < grid.size(); ++li) {
      auto [a, e] = survival_point(base, grid[li], reps, seed, li, threads);
      curve.absorbing.push_back(a);
      curve.escape.push_back(e);
    }
    return curve;
  }

  require(grid.size() <= 64, "crn mode supports at most 64 grid points");
  std::vector<Layer> layers;
  std::vector<std::pair<std::size_t, std::size_t>> contain;
  for (std::size_t li = 0; li < grid.size(); ++li) {
    layers.push_back({LayerRule::contact, grid[li]});
    if (li + 1 < grid.size()) contain.emplace_back(li, li + 1);
  }
  SimulationConfig abs_cfg = base, esc_cfg = base;
  abs_cfg.boundary = Boundary::absorbing;
  esc_cfg.boundary = Boundary::escape;

  std::vector<CoupledOutcome> abs_out(reps), esc_out(reps);
  std::vector<CoupledEngine> engines(std::max(1u, threads));
  parallel_for(reps, threads, [&](std::size_t i, unsigned w) {
    const WeightField field = replicate_field(base, seed, 0, i);
    const StreamKey clock = make_key(seed, {stream_tag::kClock, i});
    abs_out[i] = engines[w].run(abs_cfg, field, layers, contain, clock);
    esc_out[i] = engines[w].run(esc_cfg, field, layers, contain, clock);
  });

  for (std::size_t li = 0; li < grid.size(); ++li) {
    curve.absorbing.push_back({grid[li], Boundary::absorbing});
    curve.escape.push_back({grid[li], Boundary::escape});
  }
  curve.outcomes_absorbing.assign(reps, std::vector<std::uint8_t>(grid.size()));
  curve.outcomes_escape.assign(reps, std::vector<std::uint8_t>(grid.size()));
  for (std::size_t i = 0; i < reps; ++i) {
    curve.containment_violations += abs_out[i].containment_violations + esc_out[i].containment_violations;
    for (std::size_t li = 0; li < grid.size(); ++li) {
      detail::tally(curve.absorbing[li], abs_out[i].layers[li]);
      detail::tally(curve.escape[li], esc_out[i].layers[li]);
      curve.outcomes_absorbing[i][li] = abs_out[i].layers[li].survived();
      curve.outcomes_escape[i][li] = esc_out[i].layers[li].survived();
    }
  }
  for (auto& p : curve.absorbing) detail::finalize(p);
  for (auto& p : curve.escape) detail::finalize(p);
  return curve;
}

// ---------------------------------------------------------------------------
// Critical value

enum class Verdict { finite, infinite, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::finite: return "finite";
    case Verdict::infinite: return "infinite";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

enum class ProbeClass { supercritical, subcritical, inconclusive };

inline const char* to_string(ProbeClass c) {
  switch (c) {
    case ProbeClass::supercritical: return "supercritical";
    case ProbeClass::subcritical: return "subcritical";
    case ProbeClass::inconclusive: return "inconclusive";
  }
  return "?";
}

struct ProbeRecord {
  double lambda;
  SurvivalPoint escape;
  SurvivalPoint absorbing;  // reps == 0 when not needed
  ProbeClass cls;
};

struct CriticalEstimate {
  Verdict verdict = Verdict::finite;
  Interval interval{0.0, kInfinity};
  Interval analytic{0.0, kInfinity};
  Mode mode = Mode::annealed;
  bool certified = false;  // infinite verdict backed by a finite open cluster or the N q <= 1 dichotomy
  std::string reason;
  std::vector<ProbeRecord> probes;
  double horizon = 0.0;
  int depth = 0;
  double theta = 0.0;
  std::size_t reps = 0;
};

/// Stochastic bisection for lambda_c inside [lambda_e_lower, 2 lemma31_upper].
///
/// A probe is supercritical when escape-mode survival exceeds theta + 3 SE and
/// subcritical when absorbing-mode survival is below theta - 3 SE; anything
/// else stops the search with an inconclusive verdict and the interval
/// certified so far.
inline CriticalEstimate estimate_lambda_c(const SimulationConfig& cfg, double tol, std::size_t reps,
                                          double theta, std::uint64_t seed, unsigned threads = 1) {
  require(tol > 0.0, "tolerance must be > 0");
  require(reps >= 1, "reps must be >= 1");
  require(theta > 0.0 && theta < 1.0, "theta must lie in (0,1)");

  CriticalEstimate est;
  est.mode = cfg.mode;
  est.horizon = cfg.horizon;
  est.depth = cfg.depth;
  est.theta = theta;
  est.reps = reps;

  if (cfg.mode == Mode::quenched) {
    const WeightField field(cfg.master_seed, cfg.dist, cfg.n);
    if (!open_path_to_depth(field, cfg.depth)) {
      est.verdict = Verdict::infinite;
      est.certified = true;
      est.reason = "open cluster of the root is finite (no open path to depth D)";
      return est;
    }
  }
  const double upper = lemma31_upper(cfg.dist, cfg.n);
  if (!std::isfinite(upper)) {
    est.verdict = Verdict::infinite;
    est.certified = true;
    est.reason = "N * P(rho > 0) <= 1";
    return est;
  }
  est.analytic = {lambda_e_lower(cfg.dist, cfg.n), upper};
  double lo = est.analytic.lo, hi = 2.0 * upper;

  std::uint64_t probe_index = 0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    ProbeRecord pr{mid, {}, {}, ProbeClass::inconclusive};
    const std::uint64_t probe_seed = make_key(seed, {stream_tag::kProbe, probe_index++}).hi;
    pr.escape = survival_point(cfg, mid, reps, probe_seed, 0, threads, false, true).second;
    if (pr.escape.p_hat > theta + 3.0 * pr.escape.se) {
      pr.cls = ProbeClass::supercritical;
      hi = mid;
    } else {
      pr.absorbing = survival_point(cfg, mid, reps, probe_seed, 0, threads, true, false).first;
      if (pr.absorbing.p_hat < theta - 3.0 * pr.absorbing.se) {
        pr.cls = ProbeClass::subcritical;
        lo = mid;
      }
    }
    est.probes.push_back(pr);
    if (pr.cls == ProbeClass::inconclusive) {
      est.verdict = Verdict::inconclusive;
      est.reason = "probe could not be classified at the replicate budget";
      break;
    }
  }
  est.interval = {lo, hi};
  return est;
}

// ---------------------------------------------------------------------------
// Decay rate

struct DecayPoint {
  double t;
  double p_hat;
  double se;
  bool used;
};

struct DecayRecord {
  bool sufficient = false;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double slope_se = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double envelope_slope = std::numeric_limits<double>::quiet_NaN();
  bool above_lower_bound = false;  // lambda >= lambda_e_lower: no decay guaranteed
  std::vector<DecayPoint> points;
};

/// Least-squares slope of log p(t) against t from absorbing-mode runs.
///
/// All points come from the same replicates, so the delta-method covariance
/// Cov(log p_s, log p_t) = (1 - p_s)/(n p_s) for s <= t is used for slope_se.
inline DecayRecord estimate_decay_rate(const SimulationConfig& base, double lambda, const std::vector<double>& t_grid,
                                       std::size_t reps, std::uint64_t seed, unsigned threads = 1) {
  require(reps >= 1, "reps must be >= 1");
  require(!t_grid.empty() && std::is_sorted(t_grid.begin(), t_grid.end()), "t grid must be sorted ascending");
  require(t_grid.front() > 0.0, "t grid values must be > 0");

  SimulationConfig cfg = base;
  cfg.lambda = lambda;
  cfg.boundary = Boundary::absorbing;
  cfg.horizon = t_grid.back();

  std::vector<ContactOutcome> outs(reps);
  std::vector<EventEngine<ContactRule>> engines(std::max(1u, threads));
  parallel_for(reps, threads, [&](std::size_t i, unsigned w) {
    const WeightField field = replicate_field(cfg, seed, stream_tag::kDecay, i);
    Stream s(make_key(seed, {stream_tag::kDecay, i}));
    outs[i] = engines[w].run(cfg, field, s);
  });

  DecayRecord rec;
  if (cfg.dist.mean() > 0.0) {
    rec.envelope_slope = envelope_slope(cfg.dist, cfg.n, lambda);
    rec.above_lower_bound = lambda >= lambda_e_lower(cfg.dist, cfg.n);
  }
  const double n = static_cast<double>(reps);
  std::vector<double> ts, ys, ps;
  for (double t : t_grid) {
    std::size_t alive = 0;
    for (const auto& o : outs) alive += o.survived_to(t);
    const double p = static_cast<double>(alive) / n;
    const bool used = alive > 0;
    rec.points.push_back({t, p, binomial_se(p, reps), used});
    if (used) {
      ts.push_back(t);
      ys.push_back(std::log(p));
      ps.push_back(p);
    }
  }
  if (ts.size() < 3) return rec;

  const std::size_t m = ts.size();
  double tbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    tbar += ts[i];
    ybar += ys[i];
  }
  tbar /= static_cast<double>(m);
  ybar /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (ts[i] - tbar) * (ts[i] - tbar);
    sxy += (ts[i] - tbar) * (ys[i] - ybar);
  }
  if (sxx <= 0.0) return rec;
  rec.sufficient = true;
  rec.slope = sxy / sxx;
  rec.intercept = ybar - rec.slope * tbar;

  double var = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double p_earlier = std::max(ps[i], ps[j]);
      const double cov = (1.0 - p_earlier) / (n * p_earlier);
      var += (ts[i] - tbar) * (ts[j] - tbar) * cov;
    }
  }
  rec.slope_se = std::sqrt(std::max(var, 0.0)) / sxx;
  return rec;
}

}  // namespace wcp

#endif  // WCP_ESTIMATE_HPP
