#ifndef WCP_COUPLED_HPP
#define WCP_COUPLED_HPP

#include <cstdint>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "wcp/contact.hpp"
#include "wcp/random.hpp"
#include "wcp/tree.hpp"

namespace wcp {

enum class LayerRule { contact, sir };

struct Layer {
  LayerRule rule = LayerRule::contact;
  double lambda = 0.0;
};

struct CoupledOutcome {
  std::vector<ContactOutcome> layers;
  std::uint64_t event_count = 0;
  std::uint64_t containment_checks = 0;
  std::uint64_t containment_violations = 0;
};

/// Several processes driven by one graphical representation.
///
/// Each vertex owns two Poisson clocks keyed by its address: recoveries at
/// rate 1 and arrows at rate (N+1)*lambda_max*M, each arrow carrying a uniform
/// neighbour slot and a uniform mark u. A layer with rate lambda uses an arrow
/// to x's neighbour y iff u*lambda_max*M < lambda*rho(x,y); SIR layers ignore
/// arrows aimed at the parent. The clocks never depend on any layer's lambda,
/// so layers with larger lambda see a superset of arrows and contain the
/// smaller ones. Requested containments are verified at the vertices touched
/// by every event.
class CoupledEngine {
 public:
  /// `contain` lists pairs (a, b) asserting layer a is a subset of layer b.
  CoupledOutcome run(const SimulationConfig& cfg, const WeightField& field, const std::vector<Layer>& layers,
                     const std::vector<std::pair<std::size_t, std::size_t>>& contain, const StreamKey& clock_key) {
    require(field.n() == cfg.n, "weight field N does not match config N");
    require(!layers.empty() && layers.size() <= 64, "between 1 and 64 layers");
    for (auto [a, b] : contain) require(a < layers.size() && b < layers.size(), "containment pair out of range");

    k_ = layers.size();
    layers_ = &layers;
    cfg_ = &cfg;
    clock_key_ = clock_key;
    lambda_max_ = 0.0;
    for (const auto& l : layers) {
      require(l.lambda >= 0.0, "layer lambda must be >= 0");
      lambda_max_ = std::max(lambda_max_, l.lambda);
    }
    bound_ = cfg.dist.bound();
    arrow_rate_ = (cfg.n + 1) * lambda_max_ * bound_;

    tree_.reset(field, cfg.depth, cfg.max_vertices);
    states_.assign(k_, kHealthy);
    clocks_.assign(1, ClockPair{});
    active_.assign(1, 0);
    gen_.assign(1, 0);
    frozen_.assign(k_, 0);
    counts_.assign(k_, 0);
    heap_ = {};

    CoupledOutcome out;
    out.layers.assign(k_, ContactOutcome{});
    auto freeze = [&](std::size_t k, Status s, double t) {
      if (frozen_[k]) return;
      frozen_[k] = 1;
      out.layers[k].status = s;
      out.layers[k].time = t;
      out.layers[k].root_infected = states_[k] == kInfected;
    };
    auto all_frozen = [&] {
      for (auto f : frozen_) if (!f) return false;
      return true;
    };

    for (std::size_t k = 0; k < k_; ++k) infect(0, k, out);
    if (cfg.boundary == Boundary::escape && cfg.depth == 0) {
      for (std::size_t k = 0; k < k_; ++k) freeze(k, Status::escaped, 0.0);
      return out;
    }
    activate(0, 0.0);

    while (!heap_.empty() && !all_frozen()) {
      const Entry e = heap_.top();
      heap_.pop();
      if (e.gen != gen_[e.vertex] || !active_[e.vertex]) continue;
      if (e.time > cfg.horizon) break;
      ++out.event_count;
      const std::uint32_t x = e.vertex;
      std::uint32_t touched = x;
      bool has_touched = false;

      if (e.kind == kRecovery) {
        for (std::size_t k = 0; k < k_; ++k) {
          if (frozen_[k] || state(x, k) != kInfected) continue;
          state(x, k) = (*layers_)[k].rule == LayerRule::sir ? kRemoved : kHealthy;
          if (--counts_[k] == 0) freeze(k, Status::extinct, e.time);
        }
      } else {
        const ClockPair& c = clocks_[x];
        const int j = c.arrow_slot;
        const double mark = c.arrow_mark * lambda_max_ * bound_;
        std::uint32_t y = LazyTree::kNone;
        double w = 0.0;
        bool capacity_hit = false;
        if (j == 0) {
          if (x != 0) {
            y = tree_.node(x).parent;
            w = tree_.node(x).weight;
          }
        } else if (tree_.has_children(x)) {
          try {
            y = tree_.child(x, j - 1);
            sync_storage();
            w = tree_.node(y).weight;
          } catch (const CapacityError&) {
            capacity_hit = true;
          }
        }
        if (capacity_hit) {
          for (std::size_t k = 0; k < k_; ++k) freeze(k, Status::capacity_exceeded, e.time);
          break;
        }
        if (y != LazyTree::kNone) {
          touched = y;
          has_touched = true;
          bool newly = false;
          for (std::size_t k = 0; k < k_; ++k) {
            if (frozen_[k] || state(x, k) != kInfected) continue;
            if (j == 0 && (*layers_)[k].rule == LayerRule::sir) continue;
            if (!(mark < (*layers_)[k].lambda * w)) continue;
            if (state(y, k) != kHealthy) continue;
            infect(y, k, out);
            newly = true;
            if (cfg.boundary == Boundary::escape && tree_.node(y).depth == cfg.depth) {
              freeze(k, Status::escaped, e.time);
            } else if (counts_[k] > cfg.max_active) {
              freeze(k, Status::capacity_exceeded, e.time);
            }
          }
          if (newly) activate(y, e.time);
        }
      }

      for (auto [a, b] : contain) {
        if (frozen_[a] || frozen_[b]) continue;
        ++out.containment_checks;
        if (state(x, a) == kInfected && state(x, b) != kInfected) ++out.containment_violations;
        if (has_touched && state(touched, a) == kInfected && state(touched, b) != kInfected)
          ++out.containment_violations;
      }

      if (live(x)) {
        if (e.kind == kRecovery) {
          advance_recovery(x);
          push(x, kRecovery, clocks_[x].recovery_time);
        } else {
          advance_arrow(x);
          push(x, kArrow, clocks_[x].arrow_time);
        }
      } else {
        active_[x] = 0;
      }
    }
    for (std::size_t k = 0; k < k_; ++k) freeze(k, Status::alive_at_horizon, cfg.horizon);
    return out;
  }

  const LazyTree& tree() const noexcept { return tree_; }

 private:
  static constexpr std::uint8_t kHealthy = 0, kInfected = 1, kRemoved = 2;
  static constexpr std::uint8_t kRecovery = 0, kArrow = 1;

  struct ClockPair {
    bool ready = false;
    Stream recovery{StreamKey{}};
    Stream arrow{StreamKey{}};
    double recovery_time = 0.0;
    double arrow_time = 0.0;
    int arrow_slot = 0;
    double arrow_mark = 0.0;
  };

  struct Entry {
    double time;
    std::uint32_t vertex;
    std::uint32_t gen;
    std::uint8_t kind;
    bool operator>(const Entry& o) const noexcept {
      if (time != o.time) return time > o.time;
      if (vertex != o.vertex) return vertex > o.vertex;
      return kind > o.kind;
    }
  };

  std::uint8_t& state(std::uint32_t v, std::size_t k) { return states_[v * k_ + k]; }

  bool live(std::uint32_t v) {
    for (std::size_t k = 0; k < k_; ++k)
      if (!frozen_[k] && state(v, k) == kInfected) return true;
    return false;
  }

  void sync_storage() {
    const std::size_t n = tree_.size();
    if (active_.size() < n) {
      states_.resize(n * k_, kHealthy);
      clocks_.resize(n);
      active_.resize(n, 0);
      gen_.resize(n, 0);
    }
  }

  void infect(std::uint32_t v, std::size_t k, CoupledOutcome& out) {
    state(v, k) = kInfected;
    auto& o = out.layers[k];
    ++counts_[k];
    ++o.ever_infected;
    o.max_infected = std::max(o.max_infected, counts_[k]);
    o.deepest = std::max<int>(o.deepest, tree_.node(v).depth);
  }

  void advance_recovery(std::uint32_t v) {
    auto& c = clocks_[v];
    c.recovery_time += c.recovery.exponential(1.0);
  }

  void advance_arrow(std::uint32_t v) {
    auto& c = clocks_[v];
    if (arrow_rate_ <= 0.0) {
      c.arrow_time = std::numeric_limits<double>::infinity();
      return;
    }
    c.arrow_time += c.arrow.exponential(arrow_rate_);
    c.arrow_slot = static_cast<int>(c.arrow.below(static_cast<std::uint64_t>(cfg_->n + 1)));
    c.arrow_mark = c.arrow.uniform();
  }

  void activate(std::uint32_t v, double t) {
    if (active_[v]) return;
    auto& c = clocks_[v];
    if (!c.ready) {
      const StreamKey vk = tree_.node(v).key;
      c.recovery = Stream(clock_key_.absorb({vk.hi, vk.lo, 0}));
      c.arrow = Stream(clock_key_.absorb({vk.hi, vk.lo, 1}));
      c.recovery_time = 0.0;
      c.arrow_time = 0.0;
      c.ready = true;
      advance_recovery(v);
      advance_arrow(v);
    }
    while (c.recovery_time <= t) advance_recovery(v);
    while (c.arrow_time <= t) advance_arrow(v);
    active_[v] = 1;
    ++gen_[v];
    push(v, kRecovery, c.recovery_time);
    push(v, kArrow, c.arrow_time);
  }

  void push(std::uint32_t v, std::uint8_t kind, double time) {
    if (time == std::numeric_limits<double>::infinity()) return;
    heap_.push(Entry{time, v, gen_[v], kind});
  }

  std::size_t k_ = 0;
  const std::vector<Layer>* layers_ = nullptr;
  const SimulationConfig* cfg_ = nullptr;
  StreamKey clock_key_;
  double lambda_max_ = 0.0;
  double bound_ = 0.0;
  double arrow_rate_ = 0.0;
  LazyTree tree_;
  std::vector<std::uint8_t> states_;
  std::vector<ClockPair> clocks_;
  std::vector<std::uint8_t> active_;
  std::vector<std::uint32_t> gen_;
  std::vector<std::uint8_t> frozen_;
  std::vector<std::size_t> counts_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
};

}  // namespace wcp

#endif  // WCP_COUPLED_HPP
