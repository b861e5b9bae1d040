#ifndef WCP_TREE_HPP
#define WCP_TREE_HPP

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "wcp/errors.hpp"
#include "wcp/random.hpp"
#include "wcp/weights.hpp"

namespace wcp {

inline constexpr std::size_t kDefaultVertexCap = 10'000'000;

/// Vertex of the rooted N-ary tree named by its path of child indices
/// (each in 1..N) from the root O. The empty path is the root.
class VertexAddress {
 public:
  VertexAddress() = default;
  explicit VertexAddress(std::vector<std::uint32_t> path) : path_(std::move(path)) {}

  static VertexAddress root() { return {}; }

  const std::vector<std::uint32_t>& path() const noexcept { return path_; }
  int depth() const noexcept { return static_cast<int>(path_.size()); }
  bool is_root() const noexcept { return path_.empty(); }

  VertexAddress parent() const {
    require(!is_root(), "the root has no parent");
    return VertexAddress({path_.begin(), path_.end() - 1});
  }

  VertexAddress child(std::uint32_t index) const {
    auto p = path_;
    p.push_back(index);
    return VertexAddress(std::move(p));
  }

  /// "O" for the root, "(2,1,1)" otherwise.
  std::string to_string() const {
    if (path_.empty()) return "O";
    std::string s = "(";
    for (std::size_t i = 0; i < path_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(path_[i]);
    }
    return s + ")";
  }

  static VertexAddress parse(std::string_view text) {
    if (text == "O") return {};
    require(text.size() >= 3 && text.front() == '(' && text.back() == ')', "bad vertex notation");
    std::vector<std::uint32_t> path;
    std::uint64_t cur = 0;
    bool have_digit = false;
    for (char c : text.substr(1, text.size() - 2)) {
      if (c >= '0' && c <= '9') {
        cur = cur * 10 + static_cast<std::uint64_t>(c - '0');
        require(cur <= std::numeric_limits<std::uint32_t>::max(), "vertex index overflow");
        have_digit = true;
      } else if (c == ',') {
        require(have_digit && cur >= 1, "bad vertex notation");
        path.push_back(static_cast<std::uint32_t>(cur));
        cur = 0;
        have_digit = false;
      } else {
        throw ValidationError("bad vertex notation");
      }
    }
    require(have_digit && cur >= 1, "bad vertex notation");
    path.push_back(static_cast<std::uint32_t>(cur));
    return VertexAddress(std::move(path));
  }

  friend auto operator<=>(const VertexAddress&, const VertexAddress&) = default;

 private:
  std::vector<std::uint32_t> path_;
};

/// One quenched sample omega of the edge weights.
///
/// The weight of the edge above a vertex is a pure function of (master seed,
/// law, address): the address is absorbed into a stream key one
/// (depth, index) word at a time, and the weight is the first draw of the
/// stream that key names. Simulators derive the same keys incrementally.
class WeightField {
 public:
  WeightField(std::uint64_t master_seed, WeightDistribution dist, int n)
      : seed_(master_seed), dist_(std::move(dist)), n_(n), cache_(std::make_shared<Cache>()) {
    require(n >= 1, "tree branching N must be >= 1");
  }

  std::uint64_t master_seed() const noexcept { return seed_; }
  const WeightDistribution& dist() const noexcept { return dist_; }
  int n() const noexcept { return n_; }

  StreamKey root_key() const noexcept { return make_key(seed_, {0x7765696768747321ULL}); }

  static StreamKey child_key(const StreamKey& parent, int child_depth, std::uint32_t index) noexcept {
    return parent.absorb((static_cast<std::uint64_t>(child_depth) << 32) | index);
  }

  double weight_for_key(const StreamKey& key) const {
    Stream s(key);
    return dist_.sample(s);
  }

  /// Weight of the edge joining `child` to its parent. Cached per address.
  double edge_weight(const VertexAddress& child) const {
    require(!child.is_root(), "the root has no parent edge");
    for (auto idx : child.path()) require(idx >= 1 && static_cast<int>(idx) <= n_, "child index out of range");
    {
      std::lock_guard lock(cache_->mu);
      if (auto it = cache_->map.find(child); it != cache_->map.end()) return it->second;
    }
    StreamKey key = root_key();
    int depth = 0;
    for (auto idx : child.path()) key = child_key(key, ++depth, idx);
    const double w = weight_for_key(key);
    std::lock_guard lock(cache_->mu);
    cache_->map.emplace(child, w);
    return w;
  }

 private:
  struct Cache {
    std::mutex mu;
    std::map<VertexAddress, double> map;
  };

  std::uint64_t seed_;
  WeightDistribution dist_;
  int n_;
  std::shared_ptr<Cache> cache_;
};

/// Number of vertices of depth <= depth, or throws CapacityError above cap.
inline std::size_t truncation_size(int n, int depth, std::size_t cap = kDefaultVertexCap) {
  require(n >= 1 && depth >= 0, "truncation needs N >= 1 and D >= 0");
  std::size_t total = 1, level = 1;
  for (int k = 1; k <= depth; ++k) {
    if (level > cap / static_cast<std::size_t>(n)) throw CapacityError("truncation exceeds vertex cap");
    level *= static_cast<std::size_t>(n);
    total += level;
    if (total > cap) throw CapacityError("truncation exceeds vertex cap");
  }
  return total;
}

/// All vertices of depth <= D in breadth-first, child-index order.
/// Vertex i > 0 also names the edge to its parent.
struct Truncation {
  int n = 1;
  int depth = 0;
  std::vector<std::uint32_t> parent;       // parent[0] unused
  std::vector<std::uint16_t> level;        // depth of each vertex
  std::vector<std::uint32_t> child_index;  // 1..N, 0 for the root

  std::size_t vertex_count() const noexcept { return parent.size(); }
  std::size_t edge_count() const noexcept { return parent.size() - 1; }

  /// First child of vertex v, valid when level[v] < depth.
  std::size_t first_child(std::size_t v) const noexcept { return v * static_cast<std::size_t>(n) + 1; }

  VertexAddress address(std::size_t v) const {
    std::vector<std::uint32_t> path(level[v]);
    for (std::size_t i = path.size(); i-- > 0;) {
      path[i] = child_index[v];
      v = parent[v];
    }
    return VertexAddress(std::move(path));
  }
};

inline Truncation truncate(int n, int depth, std::size_t cap = kDefaultVertexCap) {
  const std::size_t count = truncation_size(n, depth, cap);
  Truncation t;
  t.n = n;
  t.depth = depth;
  t.parent.resize(count);
  t.level.resize(count);
  t.child_index.resize(count);
  t.parent[0] = 0;
  // BFS order on a complete N-ary tree: children of v are v*N+1 .. v*N+N.
  for (std::size_t v = 1; v < count; ++v) {
    t.parent[v] = static_cast<std::uint32_t>((v - 1) / static_cast<std::size_t>(n));
    t.child_index[v] = static_cast<std::uint32_t>((v - 1) % static_cast<std::size_t>(n) + 1);
    t.level[v] = static_cast<std::uint16_t>(t.level[t.parent[v]] + 1);
  }
  return t;
}

struct ClusterRecord {
  std::vector<VertexAddress> vertices;  // breadth-first order
  bool boundary_reached = false;
};

/// Vertices joined to the root by strictly positive weights, up to depth D.
/// boundary_reached == false certifies that the full open cluster is finite.
inline ClusterRecord explore_open_cluster(const WeightField& field, int depth,
                                          std::size_t cap = kDefaultVertexCap) {
  require(depth >= 0, "depth must be >= 0");
  struct Item {
    StreamKey key;
    std::size_t index;
  };
  ClusterRecord rec;
  std::vector<Item> frontier{{field.root_key(), 0}}, next;
  rec.vertices.push_back(VertexAddress::root());
  rec.boundary_reached = depth == 0;
  for (int d = 1; d <= depth && !frontier.empty(); ++d) {
    next.clear();
    for (const auto& item : frontier) {
      for (int j = 1; j <= field.n(); ++j) {
        const StreamKey key = WeightField::child_key(item.key, d, static_cast<std::uint32_t>(j));
        if (field.weight_for_key(key) > 0.0) {
          if (rec.vertices.size() >= cap) throw CapacityError("open cluster exceeds vertex cap");
          next.push_back({key, rec.vertices.size()});
          rec.vertices.push_back(rec.vertices[item.index].child(static_cast<std::uint32_t>(j)));
          if (d == depth) rec.boundary_reached = true;
        }
      }
    }
    frontier.swap(next);
  }
  return rec;
}

/// Depth-first search for one open path from the root down to depth D.
/// Same verdict as explore_open_cluster(field, D).boundary_reached without
/// enumerating the cluster.
inline bool open_path_to_depth(const WeightField& field, int depth) {
  require(depth >= 0, "depth must be >= 0");
  if (depth == 0) return true;
  struct Frame {
    StreamKey key;
    std::uint32_t next_child;
  };
  std::vector<Frame> stack{{field.root_key(), 1}};
  while (!stack.empty()) {
    auto& top = stack.back();
    if (static_cast<int>(top.next_child) > field.n()) {
      stack.pop_back();
      continue;
    }
    const int d = static_cast<int>(stack.size());
    const StreamKey key = WeightField::child_key(top.key, d, top.next_child++);
    if (field.weight_for_key(key) > 0.0) {
      if (d == depth) return true;
      stack.push_back({key, 1});
    }
  }
  return false;
}

/// Lazily materialized window of the tree used by the simulators.
///
/// Children of a vertex are created as one contiguous block the first time
/// any of them is needed; their parent-edge weights are read from the field
/// through the same key chain WeightField::edge_weight uses.
class LazyTree {
 public:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  struct Node {
    StreamKey key;
    double weight = 0.0;  // parent edge
    std::uint32_t parent = kNone;
    std::uint32_t first_child = kNone;
    std::uint16_t depth = 0;
    std::uint16_t index = 0;  // 1..N, 0 for the root
  };

  LazyTree() = default;

  void reset(const WeightField& field, int max_depth, std::size_t cap = kDefaultVertexCap) {
    require(max_depth >= 0 && max_depth < 65535, "depth out of range");
    field_ = &field;
    n_ = field.n();
    max_depth_ = max_depth;
    cap_ = cap;
    nodes_.clear();
    nodes_.push_back(Node{field.root_key(), 0.0, kNone, kNone, 0, 0});
  }

  int n() const noexcept { return n_; }
  int max_depth() const noexcept { return max_depth_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(std::uint32_t v) const noexcept { return nodes_[v]; }
  bool has_children(std::uint32_t v) const noexcept { return nodes_[v].depth < max_depth_; }

  /// Child j (0-based) of v; v must satisfy has_children(v).
  std::uint32_t child(std::uint32_t v, int j) {
    if (nodes_[v].first_child == kNone) expand(v);
    return nodes_[v].first_child + static_cast<std::uint32_t>(j);
  }

  /// Materializes every vertex down to max_depth in breadth-first order.
  void expand_all() {
    truncation_size(n_, max_depth_, cap_);
    for (std::uint32_t v = 0; v < nodes_.size(); ++v) {
      if (has_children(v) && nodes_[v].first_child == kNone) expand(v);
    }
  }

  VertexAddress address(std::uint32_t v) const {
    std::vector<std::uint32_t> path(nodes_[v].depth);
    for (std::size_t i = path.size(); i-- > 0;) {
      path[i] = nodes_[v].index;
      v = nodes_[v].parent;
    }
    return VertexAddress(std::move(path));
  }

 private:
  void expand(std::uint32_t v) {
    if (nodes_.size() + static_cast<std::size_t>(n_) > cap_) throw CapacityError("materialized tree exceeds vertex cap");
    const auto first = static_cast<std::uint32_t>(nodes_.size());
    const Node parent = nodes_[v];
    const int d = parent.depth + 1;
    for (int j = 1; j <= n_; ++j) {
      Node c;
      c.key = WeightField::child_key(parent.key, d, static_cast<std::uint32_t>(j));
      c.weight = field_->weight_for_key(c.key);
      c.parent = v;
      c.depth = static_cast<std::uint16_t>(d);
      c.index = static_cast<std::uint16_t>(j);
      nodes_.push_back(c);
    }
    nodes_[v].first_child = first;
  }

  const WeightField* field_ = nullptr;
  int n_ = 1;
  int max_depth_ = 0;
  std::size_t cap_ = kDefaultVertexCap;
  std::vector<Node> nodes_;
};

}  // namespace wcp

#endif  // WCP_TREE_HPP
