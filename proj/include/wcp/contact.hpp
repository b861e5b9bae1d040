#ifndef WCP_CONTACT_HPP
#define WCP_CONTACT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "wcp/errors.hpp"
#include "wcp/parallel.hpp"
#include "wcp/random.hpp"
#include "wcp/tree.hpp"
#include "wcp/weights.hpp"

namespace wcp {

enum class Boundary { absorbing, escape };
enum class Mode { annealed, quenched };
enum class Init { root_only, all_infected };

inline const char* to_string(Boundary b) { return b == Boundary::absorbing ? "absorbing" : "escape"; }
inline const char* to_string(Mode m) { return m == Mode::annealed ? "annealed" : "quenched"; }

/// Parameters of one simulated window of the tree.
///
/// absorbing: vertices at depth D have no children.
/// escape: the first infection at depth D ends the run as `escaped`.
/// In quenched mode the weight field is seeded by master_seed; in annealed
/// mode callers draw a fresh field per replicate.
struct SimulationConfig {
  int n = 2;
  double lambda = 0.0;
  double horizon = 1.0;
  int depth = 10;
  Boundary boundary = Boundary::absorbing;
  Mode mode = Mode::annealed;
  std::uint64_t master_seed = 0;
  WeightDistribution dist = WeightDistribution::constant(1.0);
  std::size_t max_active = 1'000'000;
  std::size_t max_vertices = kDefaultVertexCap;

  void validate() const {
    require(n >= 1 && n <= 65535, "N must be in [1, 65535]");
    require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be finite and >= 0");
    require(std::isfinite(horizon) && horizon > 0.0, "horizon T must be finite and > 0");
    require(depth >= 0 && depth < 65535, "depth D must be in [0, 65535)");
    require(max_active >= 1 && max_vertices >= 1, "caps must be >= 1");
  }
};

enum class Status { extinct, alive_at_horizon, escaped, capacity_exceeded };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::extinct: return "extinct";
    case Status::alive_at_horizon: return "alive_at_horizon";
    case Status::escaped: return "escaped";
    case Status::capacity_exceeded: return "capacity_exceeded";
  }
  return "?";
}

struct ContactOutcome {
  Status status = Status::extinct;
  double time = 0.0;  // extinction, escape or capacity time; horizon if alive
  std::size_t max_infected = 0;
  std::uint64_t event_count = 0;
  std::size_t ever_infected = 0;
  int deepest = 0;  // largest depth ever infected
  bool root_infected = false;  // root state when the run ended
  std::vector<std::pair<double, std::size_t>> infected_count_series;

  /// Survival proxy: a run that escaped or hit the cap counts as alive.
  bool survived_to(double t) const noexcept { return status != Status::extinct || time > t; }
  bool survived() const noexcept { return status != Status::extinct; }
};

struct EventLogEntry {
  double time;
  std::string vertex;
  std::string event;  // recover | infect | bcpp_add
};

struct RunOptions {
  Init init = Init::root_only;
  bool record_series = false;
  std::vector<EventLogEntry>* log = nullptr;
};

/// Infection topology rules for EventEngine.
struct ContactRule {
  static constexpr bool kParentEdges = true;  // infect any neighbour
  static constexpr bool kPermanentRemoval = false;
};

struct SirRule {
  static constexpr bool kParentEdges = false;  // sons only
  static constexpr bool kPermanentRemoval = true;
};

/// Exact event-driven sampler for the weighted contact process and its SIR
/// restriction on a lazily materialized window of the tree.
///
/// Only infected vertices carry clocks. Every infected vertex fires at the
/// constant rate 1 + lambda*S*M (S neighbour slots, M the weight bound): with
/// probability 1/(1 + lambda*S*M) it recovers, otherwise it aims at a uniform
/// slot and the arrow is kept with probability rho/M. Thinning makes the
/// per-edge infection rate exactly lambda*rho. Scratch storage is reused
/// across runs, so one engine per worker thread.
template <class Rule>
class EventEngine {
 public:
  ContactOutcome run(const SimulationConfig& cfg, const WeightField& field, Stream& stream,
                     const RunOptions& opt = {}) {
    require(field.n() == cfg.n, "weight field N does not match config N");
    require(cfg.horizon >= 0.0, "horizon must be >= 0");
    const bool escape = cfg.boundary == Boundary::escape;
    require(!(opt.init == Init::all_infected && (escape || Rule::kPermanentRemoval)),
            "all_infected start requires the absorbing contact process");

    tree_.reset(field, cfg.depth, cfg.max_vertices);
    state_.assign(1, kHealthy);
    slot_.assign(1, kNoSlot);
    infected_.clear();
    log_ = opt.log;

    ContactOutcome out;
    auto finish = [&](Status s, double t) {
      out.status = s;
      out.time = t;
      out.root_infected = state_[0] == kInfected;
      return out;
    };

    if (opt.init == Init::all_infected) {
      try {
        tree_.expand_all();
      } catch (const CapacityError&) {
        return finish(Status::capacity_exceeded, 0.0);
      }
      sync_storage();
      for (std::uint32_t v = 0; v < tree_.size(); ++v) infect(v, 0.0, out);
    } else {
      infect(0, 0.0, out);
      if (escape && cfg.depth == 0) return finish(Status::escaped, 0.0);
    }

    const int n = cfg.n;
    const int slots = Rule::kParentEdges ? n + 1 : n;
    const double bound = cfg.dist.bound();
    const double arrow_rate = cfg.lambda * slots * bound;
    const double per_vertex = 1.0 + arrow_rate;
    double t = 0.0;
    if (opt.record_series) out.infected_count_series.emplace_back(0.0, infected_.size());

    for (;;) {
      const std::size_t active = infected_.size();
      if (active == 0) return finish(Status::extinct, t);
      if (active > cfg.max_active) return finish(Status::capacity_exceeded, t);
      t += stream.exponential(static_cast<double>(active) * per_vertex);
      if (t > cfg.horizon) return finish(Status::alive_at_horizon, cfg.horizon);
      ++out.event_count;

      const std::uint32_t x = infected_[stream.below(active)];
      if (arrow_rate == 0.0 || stream.uniform() * per_vertex < 1.0) {
        recover(x, t);
      } else {
        const auto j = static_cast<int>(stream.below(static_cast<std::uint64_t>(slots)));
        std::uint32_t y;
        double w;
        if (Rule::kParentEdges && j == 0) {
          if (x == 0) continue;
          y = tree_.node(x).parent;
          w = tree_.node(x).weight;
        } else {
          if (!tree_.has_children(x)) continue;
          try {
            y = tree_.child(x, Rule::kParentEdges ? j - 1 : j);
          } catch (const CapacityError&) {
            return finish(Status::capacity_exceeded, t);
          }
          sync_storage();
          w = tree_.node(y).weight;
        }
        if (w < bound && stream.uniform() * bound >= w) continue;
        if (state_[y] != kHealthy) continue;
        infect(y, t, out);
        if (escape && tree_.node(y).depth == cfg.depth) return finish(Status::escaped, t);
      }
      if (opt.record_series) out.infected_count_series.emplace_back(t, infected_.size());
    }
  }

  const LazyTree& tree() const noexcept { return tree_; }

 private:
  static constexpr std::uint8_t kHealthy = 0, kInfected = 1, kRemoved = 2;
  static constexpr std::uint32_t kNoSlot = std::numeric_limits<std::uint32_t>::max();

  void sync_storage() {
    if (state_.size() < tree_.size()) {
      state_.resize(tree_.size(), kHealthy);
      slot_.resize(tree_.size(), kNoSlot);
    }
  }

  void infect(std::uint32_t v, double t, ContactOutcome& out) {
    state_[v] = kInfected;
    slot_[v] = static_cast<std::uint32_t>(infected_.size());
    infected_.push_back(v);
    ++out.ever_infected;
    out.max_infected = std::max(out.max_infected, infected_.size());
    out.deepest = std::max<int>(out.deepest, tree_.node(v).depth);
    if (log_) log_->push_back({t, tree_.address(v).to_string(), "infect"});
  }

  void recover(std::uint32_t v, double t) {
    state_[v] = Rule::kPermanentRemoval ? kRemoved : kHealthy;
    const std::uint32_t s = slot_[v];
    const std::uint32_t last = infected_.back();
    infected_[s] = last;
    slot_[last] = s;
    infected_.pop_back();
    slot_[v] = kNoSlot;
    if (log_) log_->push_back({t, tree_.address(v).to_string(), "recover"});
  }

  LazyTree tree_;
  std::vector<std::uint8_t> state_;
  std::vector<std::uint32_t> slot_;
  std::vector<std::uint32_t> infected_;
  std::vector<EventLogEntry>* log_ = nullptr;
};

/// One sample path of the contact process on the configured window.
inline ContactOutcome simulate_contact(const SimulationConfig& cfg, const WeightField& field, Init init,
                                       Stream& stream, std::vector<EventLogEntry>* log = nullptr) {
  EventEngine<ContactRule> engine;
  RunOptions opt;
  opt.init = init;
  opt.log = log;
  return engine.run(cfg, field, stream, opt);
}

// ---------------------------------------------------------------------------
// Binary contact path process

struct BcppResult {
  std::vector<std::uint64_t> values;       // zeta at the horizon, breadth-first vertex order
  std::vector<std::uint64_t> root_samples;  // zeta(O) at each requested sample time
  bool overflow = false;
  std::uint64_t event_count = 0;
};

inline constexpr std::uint64_t kBcppLimit = std::uint64_t{1} << 62;

/// Samples the integer-valued linear system on the absorbing truncation,
/// started from zeta == 1 everywhere: at rate 1 zeta(x) resets to 0, and at
/// rate lambda*rho(x,y) zeta(x) becomes zeta(x) + zeta(y).
///
/// Sample times must be sorted and lie in [0, horizon]. Once a count would
/// pass 2^62 the run stops with overflow set; such runs carry no statistics.
inline BcppResult simulate_bcpp(const SimulationConfig& cfg, const WeightField& field, Stream& stream,
                                const std::vector<double>& sample_times = {},
                                std::vector<EventLogEntry>* log = nullptr) {
  require(field.n() == cfg.n, "weight field N does not match config N");
  require(std::is_sorted(sample_times.begin(), sample_times.end()), "sample times must be sorted");
  LazyTree tree;
  tree.reset(field, cfg.depth, cfg.max_vertices);
  tree.expand_all();

  const std::size_t count = tree.size();
  BcppResult res;
  res.values.assign(count, 1);
  const int slots = cfg.n + 1;
  const double bound = cfg.dist.bound();
  const double arrow_rate = cfg.lambda * slots * bound;
  const double per_vertex = 1.0 + arrow_rate;
  const double total_rate = static_cast<double>(count) * per_vertex;

  std::size_t next_sample = 0;
  double t = 0.0;
  for (;;) {
    const double t_next = t + stream.exponential(total_rate);
    while (next_sample < sample_times.size() && sample_times[next_sample] < std::min(t_next, cfg.horizon + 0.0)) {
      res.root_samples.push_back(res.values[0]);
      ++next_sample;
    }
    if (t_next > cfg.horizon) break;
    t = t_next;
    ++res.event_count;
    const auto x = static_cast<std::uint32_t>(stream.below(count));
    if (arrow_rate == 0.0 || stream.uniform() * per_vertex < 1.0) {
      res.values[x] = 0;
      if (log) log->push_back({t, tree.address(x).to_string(), "recover"});
      continue;
    }
    const auto j = static_cast<int>(stream.below(static_cast<std::uint64_t>(slots)));
    std::uint32_t y;
    double w;
    if (j == 0) {
      if (x == 0) continue;
      y = tree.node(x).parent;
      w = tree.node(x).weight;
    } else {
      if (!tree.has_children(x)) continue;
      y = tree.child(x, j - 1);
      w = tree.node(y).weight;
    }
    if (w < bound && stream.uniform() * bound >= w) continue;
    const std::uint64_t add = res.values[y];
    if (add == 0) continue;
    if (res.values[x] > kBcppLimit - add) {
      res.overflow = true;
      break;
    }
    res.values[x] += add;
    if (log) log->push_back({t, tree.address(x).to_string(), "bcpp_add"});
  }
  while (next_sample < sample_times.size()) {
    res.root_samples.push_back(res.values[0]);
    ++next_sample;
  }
  return res;
}

/// E zeta_t(O) = e^{-t} sum_n t^n/n! (G^n 1)(O) with G = lambda * weighted
/// adjacency of the absorbing truncation, summed until the tail bound
/// e^{-t} sum_{k>n} a^k/k!, a = t*lambda*(N+1)*M, drops below tol.
inline double bcpp_expectation(const SimulationConfig& cfg, const WeightField& field, double t, double tol) {
  require(tol > 0.0, "tolerance must be > 0");
  require(t >= 0.0 && std::isfinite(t), "t must be finite and >= 0");
  require(field.n() == cfg.n, "weight field N does not match config N");
  if (t == 0.0) return 1.0;

  LazyTree tree;
  tree.reset(field, cfg.depth, cfg.max_vertices);
  tree.expand_all();
  const std::size_t count = tree.size();

  // Edge list of the truncation: edge v (v >= 1) joins v to its parent.
  std::vector<double> cur(count, 1.0), next(count);
  const double a = t * cfg.lambda * (cfg.n + 1) * cfg.dist.bound();
  double sum = cur[0];
  double log_term = 0.0;  // log(a^n / n!)
  for (int n = 0;; ++n) {
    // tail after term n: a^{n+1}/(n+1)! * sum_j (a/(n+2))^j, valid once n+2 > a
    if (a == 0.0) break;
    log_term += std::log(a) - std::log(static_cast<double>(n + 1));
    if (n + 2 > a) {
      const double tail = std::exp(log_term - t) / (1.0 - a / (n + 2));
      if (tail < tol) break;
    }
    require(n < 1'000'000, "expectation series did not converge");
    std::fill(next.begin(), next.end(), 0.0);
    const double scale = t / (n + 1);
    for (std::uint32_t v = 1; v < count; ++v) {
      const auto p = tree.node(v).parent;
      const double g = cfg.lambda * tree.node(v).weight * scale;
      next[p] += g * cur[v];
      next[v] += g * cur[p];
    }
    cur.swap(next);
    sum += cur[0];
  }
  return std::exp(-t) * sum;
}

// ---------------------------------------------------------------------------
// Duality

struct DualityRecord {
  double p_forward = 0.0;  // P(C_t from {O} nonempty)
  double p_dual = 0.0;     // P(O infected at t | everything infected at 0)
  double pooled_se = 0.0;
  double z_score = 0.0;
  std::size_t reps = 0;
};

/// Monte Carlo comparison of the two sides of the self-duality identity on
/// one fixed field and the absorbing truncation.
inline DualityRecord duality_check(const SimulationConfig& cfg, const WeightField& field, double t,
                                   std::size_t reps, std::uint64_t seed, unsigned threads = 1) {
  require(reps >= 1, "reps must be >= 1");
  require(t >= 0.0 && std::isfinite(t), "t must be finite and >= 0");
  SimulationConfig run_cfg = cfg;
  run_cfg.boundary = Boundary::absorbing;
  run_cfg.horizon = t;

  std::vector<std::uint8_t> fwd(reps), dual(reps);
  std::vector<EventEngine<ContactRule>> engines(std::max(1u, threads));
  parallel_for(reps, threads, [&](std::size_t i, unsigned w) {
    Stream s1(make_key(seed, {1, i}));
    RunOptions root_only;
    fwd[i] = engines[w].run(run_cfg, field, s1, root_only).status != Status::extinct;
    Stream s2(make_key(seed, {2, i}));
    RunOptions all;
    all.init = Init::all_infected;
    dual[i] = engines[w].run(run_cfg, field, s2, all).root_infected;
  });

  DualityRecord r;
  r.reps = reps;
  std::size_t nf = 0, nd = 0;
  for (std::size_t i = 0; i < reps; ++i) {
    nf += fwd[i];
    nd += dual[i];
  }
  const double n = static_cast<double>(reps);
  r.p_forward = static_cast<double>(nf) / n;
  r.p_dual = static_cast<double>(nd) / n;
  r.pooled_se = std::sqrt(r.p_forward * (1 - r.p_forward) / n + r.p_dual * (1 - r.p_dual) / n);
  const double diff = std::abs(r.p_forward - r.p_dual);
  r.z_score = r.pooled_se > 0.0 ? diff / r.pooled_se : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return r;
}

}  // namespace wcp

#endif  // WCP_CONTACT_HPP
