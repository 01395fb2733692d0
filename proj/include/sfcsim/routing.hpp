#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sfcsim/topology.hpp"

namespace sfcsim {

struct PathResult {
  std::vector<int> hops;   // DC ids, first = source, last = destination
  std::vector<int> links;  // link ids, hops.size() - 1 of them
  double distance_km = 0.0;
};

// Instrumentation for the locality and complexity checks.
struct PathCounters {
  long dijkstra_calls = 0;
  long settled_total = 0;
  int max_settled = 0;
  long dfs_calls = 0;
  long dfs_edges_visited = 0;
  // When set, every Dijkstra call appends the DCs it touched (relaxed or settled).
  bool record_touched = false;
  std::vector<std::vector<int>> touched;

  void merge(const PathCounters& other);
};

// Bandwidth-filtered Dijkstra restricted to `subgraph`. Only links with both
// endpoints inside the subgraph and free bandwidth >= required are usable.
// Throws std::invalid_argument if src or dst is outside the subgraph.
std::optional<PathResult> d2d_shortest_path(const NetworkGraph& graph, std::span<const int> subgraph,
                                            std::span<const std::int64_t> free_kbps, int src,
                                            int dst, std::int64_t required_kbps,
                                            PathCounters* counters = nullptr);

// First simple path found by DFS over the cluster graph, neighbors in ascending id.
std::optional<std::vector<int>> c2c_cluster_path(const std::vector<std::vector<int>>& cluster_graph,
                                                 int src_cluster, int dst_cluster,
                                                 PathCounters* counters = nullptr);

// Two-level path: plain D2D inside one cluster; otherwise a C2C cluster path
// followed by one D2D segment per consecutive cluster pair, each computed over
// exactly those two clusters' DCs. Intermediate segments end at the nearest
// DC of the next cluster that terminates an inter-cluster link from the
// current one. Any failing segment fails the whole query.
std::optional<PathResult> find_path(const NetworkGraph& graph, const ClusterPartition& partition,
                                    std::span<const std::int64_t> free_kbps, int src, int dst,
                                    std::int64_t required_kbps, PathCounters* counters = nullptr);

// Dijkstra over the whole network; the control for locality measurements.
std::optional<PathResult> global_shortest_path(const NetworkGraph& graph,
                                               std::span<const std::int64_t> free_kbps, int src,
                                               int dst, std::int64_t required_kbps,
                                               PathCounters* counters = nullptr);

// Re-walks a path: consecutive hops adjacent via the listed links, and every
// link has at least `required_kbps` free.
bool path_is_feasible(const NetworkGraph& graph, const PathResult& path,
                      std::span<const std::int64_t> free_kbps, std::int64_t required_kbps);

}  // namespace sfcsim
