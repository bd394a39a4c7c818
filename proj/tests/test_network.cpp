#include <queue>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "sirvar/network.hpp"

namespace sirvar::net {
namespace {

double average_clustering(const NetworkTopology& g) {
  double total = 0;
  for (std::size_t v = 0; v < g.n(); ++v) {
    const auto& nb = g.neighbors(v);
    if (nb.size() < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < nb.size(); ++a)
      for (std::size_t b = a + 1; b < nb.size(); ++b) links += g.has_edge(nb[a], nb[b]) ? 1 : 0;
    total += 2.0 * static_cast<double>(links) / static_cast<double>(nb.size() * (nb.size() - 1));
  }
  return total / static_cast<double>(g.n());
}

// Mean BFS distance from a sample of sources.
double mean_path_length(const NetworkTopology& g, std::size_t sources) {
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t src = 0; src < g.n(); src += g.n() / sources) {
    std::vector<int> dist(g.n(), -1);
    std::queue<std::size_t> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (NodeId v : g.neighbors(u))
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
    }
    for (std::size_t v = 0; v < g.n(); ++v)
      if (v != src && dist[v] > 0) {
        sum += dist[v];
        ++count;
      }
  }
  return sum / static_cast<double>(count);
}

TEST(SmallWorld, SixCycle) {
  const auto g = build_small_world(6, 2, 0.0, 0);
  const std::vector<std::pair<NodeId, NodeId>> expected{{0, 1}, {0, 5}, {1, 2},
                                                        {2, 3}, {3, 4}, {4, 5}};
  EXPECT_EQ(g.edges(), expected);
  EXPECT_TRUE(g.is_simple_undirected());
}

TEST(SmallWorld, LatticeDegreesWithoutRewiring) {
  const auto g = build_small_world(50, 6, 0.0, 0);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(g.neighbors(i).size(), 6u);
    for (int j = 1; j <= 3; ++j) EXPECT_TRUE(g.has_edge(i, (i + j) % 50));
  }
}

TEST(SmallWorld, FuzzedStructuralInvariants) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 5 + gen() % 120;
    int k = 2 * static_cast<int>(1 + gen() % 6);
    if (static_cast<std::size_t>(k) >= n) k = 2;
    const double p = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    const auto g = build_small_world(n, k, p, gen());
    ASSERT_EQ(g.n(), n);
    ASSERT_EQ(g.edge_count(), n * static_cast<std::size_t>(k) / 2);
    ASSERT_EQ(g.degree_sum(), n * static_cast<std::size_t>(k));
    ASSERT_TRUE(g.is_simple_undirected()) << "n=" << n << " k=" << k << " p=" << p;
  }
}

TEST(SmallWorld, SameSeedSameGraph) {
  const auto a = build_small_world(500, 10, 0.1, 42);
  const auto b = build_small_world(500, 10, 0.1, 42);
  const auto c = build_small_world(500, 10, 0.1, 43);
  EXPECT_EQ(a.adjacency(), b.adjacency());
  EXPECT_NE(a.adjacency(), c.adjacency());
  EXPECT_EQ(a.gen_params(), (SmallWorldParams{10, 0.1, 42}));
}

TEST(SmallWorld, ClusteringAndPathLengthRegimes) {
  const std::size_t n = 2000;
  const auto lattice = build_small_world(n, 10, 0.0, 1);
  const auto small = build_small_world(n, 10, 0.1, 1);
  const auto random = build_small_world(n, 10, 1.0, 1);

  // Ring lattice clustering is 3(k-2)/(4(k-1)).
  EXPECT_NEAR(average_clustering(lattice), 3.0 * 8 / (4.0 * 9), 1e-12);
  // Rewiring with p keeps roughly (1-p)^3 of it.
  EXPECT_NEAR(average_clustering(small), 2.0 / 3 * 0.729, 0.04);
  EXPECT_LT(average_clustering(random), 0.02);

  const double l_lattice = mean_path_length(lattice, 20);
  const double l_small = mean_path_length(small, 20);
  const double l_random = mean_path_length(random, 20);
  EXPECT_NEAR(l_lattice, static_cast<double>(n) / (2.0 * 10), 5.0);
  EXPECT_LT(l_small, 0.1 * l_lattice);
  EXPECT_LT(l_random, l_small);
}

TEST(SmallWorld, ArgumentErrors) {
  EXPECT_THROW(build_small_world(10, 3, 0.1, 0), InvalidArgument);
  EXPECT_THROW(build_small_world(10, 0, 0.1, 0), InvalidArgument);
  EXPECT_THROW(build_small_world(10, 10, 0.1, 0), InvalidArgument);
  EXPECT_THROW(build_small_world(10, 4, -0.1, 0), InvalidArgument);
  EXPECT_THROW(build_small_world(10, 4, 1.1, 0), InvalidArgument);
  EXPECT_NO_THROW(build_small_world(3, 2, 1.0, 0));
}

TEST(SmallWorld, CompleteGraphCannotRewire) {
  const auto g = build_small_world(9, 8, 1.0, 3);
  EXPECT_EQ(g.edge_count(), 36u);
  EXPECT_TRUE(g.is_simple_undirected());
}

TEST(EdgeList, Format) {
  std::ostringstream os;
  write_edge_list(build_small_world(4, 2, 0.0, 0), os);
  EXPECT_EQ(os.str(), "0 1\n0 3\n1 2\n2 3\n");
}

}  // namespace
}  // namespace sirvar::net
