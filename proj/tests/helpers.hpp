// Small fixtures shared by the unit tests.
#pragma once

#include <algorithm>
#include <vector>

#include "sfcsim/agents.hpp"
#include "sfcsim/topology.hpp"
#include "sfcsim/workload.hpp"

namespace fixture {

using namespace sfcsim;

inline DataCenterSpec dc(int id, double x = 0.0, double y = 0.0) {
  DataCenterSpec d;
  d.id = id;
  d.position = {x, y};
  return d;
}

inline LinkSpec link(int id, int a, int b, double km, std::int64_t kbps = 1'000'000) {
  LinkSpec l;
  l.id = id;
  l.a = std::min(a, b);
  l.b = std::max(a, b);
  l.distance_km = km;
  l.bandwidth_kbps = kbps;
  return l;
}

// DCs on a horizontal line, `spacing` km apart, linked consecutively.
inline NetworkGraph line(int n, double spacing = 100.0) {
  std::vector<DataCenterSpec> dcs;
  std::vector<LinkSpec> links;
  for (int i = 0; i < n; ++i) dcs.push_back(dc(i, i * spacing, 0.0));
  for (int i = 0; i + 1 < n; ++i) links.push_back(link(i, i, i + 1, spacing));
  return NetworkGraph(dcs, links);
}

// Builds a partition with a fixed assignment instead of running k-means.
inline ClusterPartition partition_of(const NetworkGraph& g, const std::vector<int>& assignment) {
  ClusterPartition p;
  const int k = *std::max_element(assignment.begin(), assignment.end()) + 1;
  p.assignment = assignment;
  p.clusters.assign(k, {});
  p.centroids.assign(k, {});
  p.intra_links.assign(k, {});
  for (int d = 0; d < g.dc_count(); ++d) p.clusters[assignment[d]].push_back(d);
  for (int c = 0; c < k; ++c) {
    for (int d : p.clusters[c]) {
      p.centroids[c].x_km += g.dc(d).position.x_km / p.clusters[c].size();
      p.centroids[c].y_km += g.dc(d).position.y_km / p.clusters[c].size();
    }
    p.size_limit = std::max<int>(p.size_limit, static_cast<int>(p.clusters[c].size()));
  }
  for (const auto& l : g.links()) {
    if (assignment[l.a] == assignment[l.b])
      p.intra_links[assignment[l.a]].push_back(l.id);
    else
      p.inter_links.push_back(l.id);
  }
  p.adjacency = cluster_adjacency(g, assignment, k);
  return p;
}

inline SfcRequest request(int id, SfcKind kind, int src, int dst, std::int64_t kbps = -1) {
  const auto catalog = default_catalog();
  SfcRequest r;
  r.id = id;
  r.sfc = static_cast<int>(kind);
  r.source_dc = src;
  r.dest_dc = dst;
  r.bandwidth_kbps = kbps >= 0 ? kbps : catalog.sfcs[r.sfc].bw_min_kbps;
  return r;
}

}  // namespace fixture
