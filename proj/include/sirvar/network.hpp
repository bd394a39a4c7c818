#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace sirvar::net {

using NodeId = std::uint32_t;

struct SmallWorldParams {
  int k = defaults::kMeanDegree;  // even mean degree
  double p_rewire = defaults::kRewireProb;
  std::uint64_t seed = 0;

  friend bool operator==(const SmallWorldParams&, const SmallWorldParams&) = default;
};

/// Undirected simple graph in sorted adjacency-list form. Immutable once
/// built; replicates may share one instance read-only.
class NetworkTopology {
 public:
  NetworkTopology(std::vector<std::vector<NodeId>> adjacency, SmallWorldParams gen)
      : adjacency_(std::move(adjacency)), gen_(gen) {
    for (auto& row : adjacency_) std::sort(row.begin(), row.end());
  }

  std::size_t n() const noexcept { return adjacency_.size(); }
  const std::vector<NodeId>& neighbors(std::size_t i) const { return adjacency_[i]; }
  const std::vector<std::vector<NodeId>>& adjacency() const noexcept { return adjacency_; }
  const SmallWorldParams& gen_params() const noexcept { return gen_; }

  std::size_t degree_sum() const noexcept {
    std::size_t s = 0;
    for (const auto& row : adjacency_) s += row.size();
    return s;
  }
  std::size_t edge_count() const noexcept { return degree_sum() / 2; }

  bool has_edge(std::size_t i, std::size_t j) const {
    const auto& row = adjacency_[i];
    return std::binary_search(row.begin(), row.end(), static_cast<NodeId>(j));
  }

  /// Edges as (i, j) with i < j, in lexicographic order.
  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(edge_count());
    for (std::size_t i = 0; i < adjacency_.size(); ++i)
      for (NodeId j : adjacency_[i])
        if (j > i) out.emplace_back(static_cast<NodeId>(i), j);
    return out;
  }

  /// Self-loops, duplicates, asymmetry.
  bool is_simple_undirected() const {
    for (std::size_t i = 0; i < adjacency_.size(); ++i) {
      const auto& row = adjacency_[i];
      for (std::size_t x = 0; x < row.size(); ++x) {
        if (row[x] == i || row[x] >= adjacency_.size()) return false;
        if (x > 0 && row[x] == row[x - 1]) return false;
        if (!has_edge(row[x], i)) return false;
      }
    }
    return true;
  }

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  SmallWorldParams gen_;
};

namespace detail {

inline void erase_one(std::vector<NodeId>& row, NodeId v) {
  auto it = std::find(row.begin(), row.end(), v);
  if (it != row.end()) {
    *it = row.back();
    row.pop_back();
  }
}

inline bool contains(const std::vector<NodeId>& row, NodeId v) {
  return std::find(row.begin(), row.end(), v) != row.end();
}

}  // namespace detail

inline void check_small_world_args(std::size_t n, int k, double p_rewire) {
  if (k < 2 || k % 2 != 0) throw InvalidArgument("mean degree k must be even and >= 2");
  if (static_cast<std::size_t>(k) >= n) throw InvalidArgument("mean degree k must be < n");
  if (!(p_rewire >= 0.0 && p_rewire <= 1.0))
    throw InvalidArgument("p_rewire must lie in [0, 1]");
  if (n > std::numeric_limits<NodeId>::max()) throw InvalidArgument("too many nodes");
}

/// Watts-Strogatz small world: ring lattice where each node links to k/2
/// neighbours on either side, then every lattice edge (i, i+j) is rewired
/// with probability p_rewire to (i, t) for a uniform t that is neither i nor
/// already adjacent to i. Edges are visited offset by offset (j = 1..k/2),
/// node by node within an offset, as in the original construction.
inline NetworkTopology build_small_world(std::size_t n, int k, double p_rewire,
                                         std::uint64_t seed) {
  check_small_world_args(n, k, p_rewire);

  const int half = k / 2;
  std::vector<std::vector<NodeId>> adj(n);
  for (auto& row : adj) row.reserve(static_cast<std::size_t>(k) + 4);
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 1; j <= half; ++j) {
      const auto t = static_cast<NodeId>((i + static_cast<std::size_t>(j)) % n);
      adj[i].push_back(t);
      adj[t].push_back(static_cast<NodeId>(i));
    }

  if (p_rewire > 0.0) {
    Xoshiro256 rng(seed);
    for (int j = 1; j <= half; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform() >= p_rewire) continue;
        const auto u = static_cast<NodeId>(i);
        const auto v = static_cast<NodeId>((i + static_cast<std::size_t>(j)) % n);
        // The lattice edge may already have been rewired away from this end.
        if (!detail::contains(adj[u], v)) continue;
        if (adj[u].size() >= n - 1) continue;  // no free target
        NodeId w;
        do {
          w = static_cast<NodeId>(rng.below(n));
        } while (w == u || detail::contains(adj[u], w));
        detail::erase_one(adj[u], v);
        detail::erase_one(adj[v], u);
        adj[u].push_back(w);
        adj[w].push_back(u);
      }
    }
  }
  return NetworkTopology(std::move(adj), SmallWorldParams{k, p_rewire, seed});
}

inline NetworkTopology build_small_world(std::size_t n, const SmallWorldParams& gen) {
  return build_small_world(n, gen.k, gen.p_rewire, gen.seed);
}

/// Edge list, one "i j" pair per line, 0-indexed, i < j.
inline void write_edge_list(const NetworkTopology& topo, std::ostream& os) {
  for (const auto& [i, j] : topo.edges()) os << i << ' ' << j << '\n';
}

inline void save_edge_list(const NetworkTopology& topo, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError(path, "cannot open for writing");
  write_edge_list(topo, os);
  if (!os) throw IoError(path, "write failed");
}

}  // namespace sirvar::net
