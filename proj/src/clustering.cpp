#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sfcsim/rng.hpp"
#include "sfcsim/topology.hpp"

namespace sfcsim {

namespace {

std::vector<Point> seed_centroids(const std::vector<DataCenterSpec>& dcs, int k, Rng& rng) {
  const int n = static_cast<int>(dcs.size());
  std::vector<Point> centroids;
  std::vector<char> chosen(n, 0);
  const int first = static_cast<int>(rng.uniform_int(0, n - 1));
  centroids.push_back(dcs[first].position);
  chosen[first] = 1;

  std::vector<double> weight(n);
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) {
        const double d = distance_km(dcs[i].position, c);
        best = std::min(best, d * d);
      }
      weight[i] = chosen[i] ? 0.0 : best;
      total += weight[i];
    }
    int pick = -1;
    if (total > 0.0) {
      const double r = rng.uniform01() * total;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        if (weight[i] <= 0.0) continue;
        acc += weight[i];
        pick = i;
        if (acc > r) break;
      }
    } else {
      // Remaining points coincide with chosen ones.
      for (int i = 0; i < n && pick < 0; ++i)
        if (!chosen[i]) pick = i;
    }
    chosen[pick] = 1;
    centroids.push_back(dcs[pick].position);
  }
  return centroids;
}

// Greedy capacity-respecting assignment: the DCs with the clearest preference
// (nearest minus second-nearest distance, most negative first) choose first,
// each taking its nearest centroid that still has room.
std::vector<int> greedy_assign(const std::vector<DataCenterSpec>& dcs,
                               const std::vector<Point>& centroids, int limit) {
  const int n = static_cast<int>(dcs.size());
  const int k = static_cast<int>(centroids.size());
  std::vector<std::vector<std::pair<double, int>>> ranked(n);
  std::vector<double> margin(n);
  for (int i = 0; i < n; ++i) {
    auto& r = ranked[i];
    r.reserve(k);
    for (int c = 0; c < k; ++c) r.emplace_back(distance_km(dcs[i].position, centroids[c]), c);
    std::sort(r.begin(), r.end());
    margin[i] = k > 1 ? r[0].first - r[1].first : 0.0;
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return margin[x] < margin[y]; });

  std::vector<int> load(k, 0);
  std::vector<int> assignment(n, -1);
  for (int i : order) {
    for (const auto& [d, c] : ranked[i]) {
      if (load[c] < limit) {
        assignment[i] = c;
        ++load[c];
        break;
      }
    }
  }
  return assignment;
}

std::vector<Point> recompute_centroids(const std::vector<DataCenterSpec>& dcs,
                                       const std::vector<int>& assignment,
                                       const std::vector<Point>& previous) {
  const int k = static_cast<int>(previous.size());
  std::vector<Point> sum(k);
  std::vector<int> count(k, 0);
  for (std::size_t i = 0; i < dcs.size(); ++i) {
    sum[assignment[i]].x_km += dcs[i].position.x_km;
    sum[assignment[i]].y_km += dcs[i].position.y_km;
    ++count[assignment[i]];
  }
  std::vector<Point> out(k);
  for (int c = 0; c < k; ++c) {
    out[c] = count[c] == 0 ? previous[c] : Point{sum[c].x_km / count[c], sum[c].y_km / count[c]};
  }
  return out;
}

}  // namespace

ClusterPartition make_clusters(const NetworkGraph& graph, int size_limit, std::uint64_t seed,
                               const ClusteringOptions& options) {
  const int n = graph.dc_count();
  if (size_limit < 1 || size_limit > n)
    throw std::invalid_argument("cluster size limit must be in [1, dc_count]");
  const int k = (n + size_limit - 1) / size_limit;
  const auto& dcs = graph.dcs();

  Rng rng(seed);
  std::vector<Point> centroids = seed_centroids(dcs, k, rng);
  std::vector<int> assignment;
  int iterations = 0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    ++iterations;
    auto next = greedy_assign(dcs, centroids, size_limit);
    if (next == assignment) break;  // centroids are already the means of `next`
    auto moved_to = recompute_centroids(dcs, next, centroids);
    double movement = 0.0;
    for (int c = 0; c < k; ++c) movement = std::max(movement, distance_km(moved_to[c], centroids[c]));
    assignment = std::move(next);
    centroids = std::move(moved_to);
    if (movement <= options.tolerance_km) break;
  }

  // Renumber clusters by their lowest DC id and drop empty ones.
  std::vector<int> first_member(k, n);
  for (int i = n - 1; i >= 0; --i) first_member[assignment[i]] = i;
  std::vector<int> order;
  for (int c = 0; c < k; ++c)
    if (first_member[c] < n) order.push_back(c);
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return first_member[x] < first_member[y]; });
  std::vector<int> remap(k, -1);
  for (std::size_t i = 0; i < order.size(); ++i) remap[order[i]] = static_cast<int>(i);

  ClusterPartition p;
  p.size_limit = size_limit;
  p.iterations = iterations;
  p.assignment.resize(n);
  p.clusters.assign(order.size(), {});
  p.centroids.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) p.centroids[i] = centroids[order[i]];
  for (int i = 0; i < n; ++i) {
    p.assignment[i] = remap[assignment[i]];
    p.clusters[p.assignment[i]].push_back(i);
  }
  p.intra_links.assign(order.size(), {});
  for (const auto& l : graph.links()) {
    if (p.is_inter(l)) {
      p.inter_links.push_back(l.id);
    } else {
      p.intra_links[p.assignment[l.a]].push_back(l.id);
    }
  }
  p.adjacency = cluster_adjacency(graph, p.assignment, p.cluster_count());
  return p;
}

}  // namespace sfcsim
