#include <doctest.h>

#include <numeric>
#include <set>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sfcsim/rng.hpp"
#include "sfcsim/routing.hpp"

using namespace sfcsim;

namespace {

// A(0)-B(1) 1 km, B-C(2) 1 km, A-C 3 km.
NetworkGraph triangle() {
  using fixture::dc;
  using fixture::link;
  return NetworkGraph({dc(0, 0, 0), dc(1, 1, 0), dc(2, 2, 0)},
                      {link(0, 0, 1, 1.0), link(1, 1, 2, 1.0), link(2, 0, 2, 3.0)});
}

std::vector<std::int64_t> full(const NetworkGraph& g) {
  std::vector<std::int64_t> f;
  for (const auto& l : g.links()) f.push_back(l.bandwidth_kbps);
  return f;
}

std::vector<int> all_dcs(const NetworkGraph& g) {
  std::vector<int> v(g.dc_count());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

bool loop_free(const PathResult& p) {
  return std::set<int>(p.hops.begin(), p.hops.end()).size() == p.hops.size();
}

}  // namespace

TEST_CASE("d2d on the triangle") {
  const auto g = triangle();
  auto free = full(g);
  const auto members = all_dcs(g);

  const auto same = d2d_shortest_path(g, members, free, 1, 1, 100);
  REQUIRE(same);
  CHECK(same->hops == std::vector<int>{1});
  CHECK(same->links.empty());
  CHECK(same->distance_km == 0.0);

  const auto ac = d2d_shortest_path(g, members, free, 0, 2, 100);
  REQUIRE(ac);
  CHECK(ac->hops == std::vector<int>{0, 1, 2});
  CHECK(ac->distance_km == 2.0);

  free[0] = 99;  // A-B below the requirement
  const auto forced = d2d_shortest_path(g, members, free, 0, 2, 100);
  REQUIRE(forced);
  CHECK(forced->hops == std::vector<int>{0, 2});
  CHECK(forced->distance_km == 3.0);
  CHECK(path_is_feasible(g, *forced, free, 100));
  CHECK_FALSE(path_is_feasible(g, *ac, free, 100));

  free[2] = 0;
  CHECK_FALSE(d2d_shortest_path(g, members, free, 0, 2, 100));
  free[0] = 100;  // boundary: exactly enough is usable
  CHECK(d2d_shortest_path(g, members, free, 0, 2, 100));
}

TEST_CASE("d2d stays inside the subgraph") {
  const auto g = triangle();
  const auto free = full(g);
  const std::vector<int> ac{0, 2};
  const auto p = d2d_shortest_path(g, ac, free, 0, 2, 1);
  REQUIRE(p);
  CHECK(p->distance_km == 3.0);
  CHECK_THROWS_AS(d2d_shortest_path(g, ac, free, 0, 1, 1), std::invalid_argument);
}

TEST_CASE("c2c DFS") {
  const std::vector<std::vector<int>> chain{{1}, {0, 2}, {1}};
  CHECK(*c2c_cluster_path(chain, 1, 1) == std::vector<int>{1});
  CHECK(*c2c_cluster_path(chain, 0, 2) == std::vector<int>{0, 1, 2});

  const std::vector<std::vector<int>> split{{1}, {0}, {3}, {2}};
  CHECK_FALSE(c2c_cluster_path(split, 0, 3));

  // Ascending-neighbor DFS returns the first simple path, not the shortest.
  const std::vector<std::vector<int>> ring{{1, 3}, {0, 2}, {1, 3}, {0, 2}};
  CHECK(*c2c_cluster_path(ring, 0, 3) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("DFS visits each cluster edge at most twice") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int c = static_cast<int>(rng.uniform_int(1, 12));
    std::vector<std::vector<int>> adj(c);
    long edges = 0;
    for (int a = 0; a < c; ++a)
      for (int b = a + 1; b < c; ++b)
        if (rng.uniform01() < 0.3) {
          adj[a].push_back(b);
          adj[b].push_back(a);
          ++edges;
        }
    PathCounters counters;
    const int s = static_cast<int>(rng.uniform_int(0, c - 1));
    const int t = static_cast<int>(rng.uniform_int(0, c - 1));
    const auto path = c2c_cluster_path(adj, s, t, &counters);
    CHECK(counters.dfs_edges_visited <= 2 * edges);
    if (path) {
      CHECK(path->front() == s);
      CHECK(path->back() == t);
      for (std::size_t i = 0; i + 1 < path->size(); ++i) {
        const auto& n = adj[(*path)[i]];
        CHECK(std::find(n.begin(), n.end(), (*path)[i + 1]) != n.end());
      }
    }
  }
}

TEST_CASE("find_path through a single inter-cluster link") {
  // Cluster 0 = {0,1,2}, cluster 1 = {3,4}; only link 2-3 crosses.
  using fixture::dc;
  using fixture::link;
  const NetworkGraph g({dc(0, 0, 0), dc(1, 10, 0), dc(2, 20, 0), dc(3, 30, 0), dc(4, 40, 0)},
                       {link(0, 0, 1, 10), link(1, 1, 2, 10), link(2, 0, 2, 25), link(3, 2, 3, 10),
                        link(4, 3, 4, 10)});
  const auto p = fixture::partition_of(g, {0, 0, 0, 1, 1});
  const auto free = full(g);

  PathCounters counters;
  const auto path = find_path(g, p, free, 0, 4, 10, &counters);
  REQUIRE(path);
  CHECK(path->hops == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(path->distance_km == 40.0);
  CHECK(counters.max_settled <= 5);

  const auto intra = find_path(g, p, free, 0, 2, 10);
  const auto direct = d2d_shortest_path(g, p.clusters[0], free, 0, 2, 10);
  REQUIRE(intra);
  CHECK(intra->hops == direct->hops);

  auto starved = free;
  starved[3] = 5;
  CHECK_FALSE(find_path(g, p, starved, 0, 4, 10));
}

TEST_CASE("settled counts are bounded by the searched subgraph") {
  // Clusters of 5 and 4 DCs on a line.
  const auto g = fixture::line(9);
  const auto p = fixture::partition_of(g, {0, 0, 0, 0, 0, 1, 1, 1, 1});
  const auto free = full(g);
  PathCounters single;
  find_path(g, p, free, 0, 4, 1, &single);
  CHECK(single.max_settled <= 5);
  PathCounters pair;
  find_path(g, p, free, 0, 8, 1, &pair);
  CHECK(pair.max_settled <= 9);
}

TEST_CASE("d2d matches brute-force enumeration on random subgraphs") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    TopologyConfig cfg;
    cfg.dc_count = static_cast<int>(rng.uniform_int(2, 10));
    cfg.seed = rng.next();
    const auto g = build_network(cfg);
    std::vector<std::int64_t> free;
    for (const auto& l : g.links()) free.push_back(rng.uniform_int(0, l.bandwidth_kbps));
    const std::int64_t need = rng.uniform_int(1, 1'000'000);
    std::vector<int> members;
    for (int d = 0; d < g.dc_count(); ++d)
      if (rng.uniform01() < 0.8) members.push_back(d);
    if (members.empty()) members.push_back(0);
    const int s = members[rng.uniform_int(0, static_cast<std::int64_t>(members.size()) - 1)];
    const int t = members[rng.uniform_int(0, static_cast<std::int64_t>(members.size()) - 1)];
    const auto got = d2d_shortest_path(g, members, free, s, t, need);
    const auto want = oracle::brute_force_distance(g, members, free, s, t, need);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      CHECK(got->distance_km == doctest::Approx(*want).epsilon(1e-12));
      CHECK(path_is_feasible(g, *got, free, need));
      for (int h : got->hops) CHECK(std::find(members.begin(), members.end(), h) != members.end());
    }
  }
}

TEST_CASE("find_path is feasible, loop-free and never beats global Dijkstra") {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    TopologyConfig cfg;
    cfg.dc_count = static_cast<int>(rng.uniform_int(3, 12));
    cfg.seed = rng.next();
    const auto g = build_network(cfg);
    const auto p = make_clusters(g, static_cast<int>(rng.uniform_int(1, 4)), rng.next());
    std::vector<std::int64_t> free;
    for (const auto& l : g.links()) free.push_back(rng.uniform_int(200'000, l.bandwidth_kbps));
    const std::int64_t need = rng.uniform_int(1, 400'000);
    const int s = static_cast<int>(rng.uniform_int(0, g.dc_count() - 1));
    const int t = static_cast<int>(rng.uniform_int(0, g.dc_count() - 1));
    const auto two_level = find_path(g, p, free, s, t, need);
    const auto global = global_shortest_path(g, free, s, t, need);
    if (!two_level) continue;
    REQUIRE(global);
    CHECK(path_is_feasible(g, *two_level, free, need));
    CHECK(loop_free(*two_level));
    CHECK(two_level->hops.front() == s);
    CHECK(two_level->hops.back() == t);
    CHECK(two_level->distance_km >= global->distance_km - 1e-9);
  }
}

TEST_CASE("routing is deterministic") {
  TopologyConfig cfg;
  cfg.dc_count = 30;
  const auto g = build_network(cfg);
  const auto p = make_clusters(g, 4, 1);
  const auto free = full(g);
  for (int t = 1; t < 30; ++t) {
    const auto a = find_path(g, p, free, 0, t, 1);
    const auto b = find_path(g, p, free, 0, t, 1);
    REQUIRE(a.has_value() == b.has_value());
    if (a) CHECK(a->hops == b->hops);
  }
}
