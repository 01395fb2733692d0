#include "sfcsim/routing.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>

namespace sfcsim {

void PathCounters::merge(const PathCounters& other) {
  dijkstra_calls += other.dijkstra_calls;
  settled_total += other.settled_total;
  max_settled = std::max(max_settled, other.max_settled);
  dfs_calls += other.dfs_calls;
  dfs_edges_visited += other.dfs_edges_visited;
  if (record_touched)
    touched.insert(touched.end(), other.touched.begin(), other.touched.end());
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dijkstra from src over DCs with mask[dc] != 0, stopping at the first
// settled DC with target[dc] != 0. Heap order (distance, id) makes ties
// resolve to the lowest DC id.
std::optional<PathResult> dijkstra(const NetworkGraph& graph, const std::vector<char>& mask,
                                   std::span<const std::int64_t> free_kbps, int src,
                                   const std::vector<char>& target, std::int64_t required_kbps,
                                   PathCounters* counters) {
  const int n = graph.dc_count();
  std::vector<double> dist(n, kInf);
  std::vector<int> via_link(n, -1);
  std::vector<char> settled(n, 0);
  std::vector<int> touched;
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

  dist[src] = 0.0;
  heap.emplace(0.0, src);
  touched.push_back(src);
  int settled_count = 0;
  int reached = -1;
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (settled[u]) continue;
    settled[u] = 1;
    ++settled_count;
    if (target[u]) {
      reached = u;
      break;
    }
    for (const auto& adj : graph.neighbors(u)) {
      const int v = adj.neighbor;
      if (!mask[v] || settled[v]) continue;
      if (free_kbps[adj.link] < required_kbps) continue;
      const double nd = d + graph.link(adj.link).distance_km;
      if (nd < dist[v]) {
        if (dist[v] == kInf) touched.push_back(v);
        dist[v] = nd;
        via_link[v] = adj.link;
        heap.emplace(nd, v);
      }
    }
  }

  if (counters) {
    ++counters->dijkstra_calls;
    counters->settled_total += settled_count;
    counters->max_settled = std::max(counters->max_settled, settled_count);
    if (counters->record_touched) counters->touched.push_back(std::move(touched));
  }
  if (reached < 0) return std::nullopt;

  PathResult path;
  path.distance_km = dist[reached];
  for (int at = reached; at != src;) {
    const int l = via_link[at];
    path.hops.push_back(at);
    path.links.push_back(l);
    at = graph.link(l).other(at);
  }
  path.hops.push_back(src);
  std::reverse(path.hops.begin(), path.hops.end());
  std::reverse(path.links.begin(), path.links.end());
  return path;
}

void append_segment(PathResult& into, const PathResult& seg) {
  if (into.hops.empty()) {
    into = seg;
    return;
  }
  into.hops.insert(into.hops.end(), seg.hops.begin() + 1, seg.hops.end());
  into.links.insert(into.links.end(), seg.links.begin(), seg.links.end());
  into.distance_km += seg.distance_km;
}

// Consecutive segments may pass through the same DC of the shared cluster;
// cutting the loop keeps the path feasible and only shortens it.
void remove_cycles(const NetworkGraph& graph, PathResult& path) {
  std::vector<int> hops{path.hops.front()};
  std::vector<int> links;
  for (std::size_t i = 1; i < path.hops.size(); ++i) {
    const auto seen = std::find(hops.begin(), hops.end(), path.hops[i]);
    if (seen != hops.end()) {
      const auto keep = seen - hops.begin();
      hops.resize(keep + 1);
      links.resize(keep);
      continue;
    }
    hops.push_back(path.hops[i]);
    links.push_back(path.links[i - 1]);
  }
  path.hops = std::move(hops);
  path.links = std::move(links);
  path.distance_km = 0.0;
  for (int l : path.links) path.distance_km += graph.link(l).distance_km;
}

}  // namespace

std::optional<PathResult> d2d_shortest_path(const NetworkGraph& graph, std::span<const int> subgraph,
                                            std::span<const std::int64_t> free_kbps, int src,
                                            int dst, std::int64_t required_kbps,
                                            PathCounters* counters) {
  const int n = graph.dc_count();
  std::vector<char> mask(n, 0);
  for (int dc : subgraph) mask.at(dc) = 1;
  if (src < 0 || src >= n || dst < 0 || dst >= n || !mask[src] || !mask[dst])
    throw std::invalid_argument("d2d_shortest_path: endpoint outside the subgraph");
  std::vector<char> target(n, 0);
  target[dst] = 1;
  return dijkstra(graph, mask, free_kbps, src, target, required_kbps, counters);
}

std::optional<PathResult> global_shortest_path(const NetworkGraph& graph,
                                               std::span<const std::int64_t> free_kbps, int src,
                                               int dst, std::int64_t required_kbps,
                                               PathCounters* counters) {
  std::vector<char> mask(graph.dc_count(), 1);
  std::vector<char> target(graph.dc_count(), 0);
  target.at(dst) = 1;
  return dijkstra(graph, mask, free_kbps, src, target, required_kbps, counters);
}

std::optional<std::vector<int>> c2c_cluster_path(const std::vector<std::vector<int>>& cluster_graph,
                                                 int src_cluster, int dst_cluster,
                                                 PathCounters* counters) {
  const int c = static_cast<int>(cluster_graph.size());
  if (src_cluster < 0 || src_cluster >= c || dst_cluster < 0 || dst_cluster >= c)
    throw std::invalid_argument("c2c_cluster_path: unknown cluster");
  if (counters) ++counters->dfs_calls;
  if (src_cluster == dst_cluster) return std::vector<int>{src_cluster};

  // Iterative DFS; the stack holds the current path and each frame's next neighbor index.
  std::vector<char> visited(c, 0);
  std::vector<int> path{src_cluster};
  std::vector<std::size_t> next_index{0};
  visited[src_cluster] = 1;
  long edges = 0;
  std::optional<std::vector<int>> found;
  while (!path.empty()) {
    const int u = path.back();
    auto& idx = next_index.back();
    if (idx >= cluster_graph[u].size()) {
      path.pop_back();
      next_index.pop_back();
      continue;
    }
    const int v = cluster_graph[u][idx++];
    ++edges;
    if (visited[v]) continue;
    visited[v] = 1;
    path.push_back(v);
    next_index.push_back(0);
    if (v == dst_cluster) {
      found = path;
      break;
    }
  }
  if (counters) counters->dfs_edges_visited += edges;
  return found;
}

std::optional<PathResult> find_path(const NetworkGraph& graph, const ClusterPartition& partition,
                                    std::span<const std::int64_t> free_kbps, int src, int dst,
                                    std::int64_t required_kbps, PathCounters* counters) {
  const int src_cluster = partition.cluster_of(src);
  const int dst_cluster = partition.cluster_of(dst);
  if (src_cluster == dst_cluster) {
    return d2d_shortest_path(graph, partition.clusters[src_cluster], free_kbps, src, dst,
                             required_kbps, counters);
  }

  const auto cluster_path =
      c2c_cluster_path(partition.adjacency, src_cluster, dst_cluster, counters);
  if (!cluster_path) return std::nullopt;

  const int n = graph.dc_count();
  PathResult total;
  int current = src;
  for (std::size_t i = 0; i + 1 < cluster_path->size(); ++i) {
    const int a = (*cluster_path)[i];
    const int b = (*cluster_path)[i + 1];
    std::vector<char> mask(n, 0);
    for (int dc : partition.clusters[a]) mask[dc] = 1;
    for (int dc : partition.clusters[b]) mask[dc] = 1;

    std::vector<char> target(n, 0);
    if (b == dst_cluster) {
      target[dst] = 1;
    } else {
      // Gateways: DCs of b terminating an inter-cluster link from a.
      for (int l : partition.inter_links) {
        const auto& link = graph.link(l);
        const int ca = partition.assignment[link.a];
        const int cb = partition.assignment[link.b];
        if (ca == a && cb == b) target[link.b] = 1;
        if (ca == b && cb == a) target[link.a] = 1;
      }
    }
    auto segment = dijkstra(graph, mask, free_kbps, current, target, required_kbps, counters);
    if (!segment) return std::nullopt;
    current = segment->hops.back();
    append_segment(total, *segment);
  }
  remove_cycles(graph, total);
  return total;
}

bool path_is_feasible(const NetworkGraph& graph, const PathResult& path,
                      std::span<const std::int64_t> free_kbps, std::int64_t required_kbps) {
  if (path.hops.empty()) return false;
  if (path.links.size() + 1 != path.hops.size()) return false;
  for (std::size_t i = 0; i < path.links.size(); ++i) {
    const auto link = graph.find_link(path.hops[i], path.hops[i + 1]);
    if (!link || *link != path.links[i]) return false;
    if (free_kbps[*link] < required_kbps) return false;
  }
  return true;
}

}  // namespace sfcsim
