#include "sfcsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "sfcsim/error.hpp"
#include "sfcsim/rng.hpp"

namespace sfcsim {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<int> parent_;
};

void check_capacities(const DataCenterSpec& dc) {
  if (dc.storage_gb <= 0 || dc.vcpu <= 0 || dc.ram_gb <= 0)
    throw ConfigError("data center " + std::to_string(dc.id) + " has a non-positive capacity");
}

}  // namespace

double distance_km(Point a, Point b) { return std::hypot(a.x_km - b.x_km, a.y_km - b.y_km); }

bool is_connected(int node_count, const std::vector<LinkSpec>& links) {
  if (node_count <= 1) return true;
  DisjointSets sets(node_count);
  int components = node_count;
  for (const auto& l : links)
    if (sets.unite(l.a, l.b)) --components;
  return components == 1;
}

NetworkGraph::NetworkGraph(std::vector<DataCenterSpec> dcs, std::vector<LinkSpec> links)
    : dcs_(std::move(dcs)), links_(std::move(links)) {
  const int n = dc_count();
  if (n < 1) throw ConfigError("network needs at least one data center");
  for (int i = 0; i < n; ++i) {
    if (dcs_[i].id != i) throw ConfigError("data center ids must be dense 0..N-1 in order");
    check_capacities(dcs_[i]);
  }
  adjacency_.assign(n, {});
  for (int i = 0; i < link_count(); ++i) {
    auto& l = links_[i];
    l.id = i;
    if (l.a > l.b) std::swap(l.a, l.b);
    if (l.a < 0 || l.b >= n) throw ConfigError("link endpoint out of range");
    if (l.a == l.b) throw ConfigError("self-loop on data center " + std::to_string(l.a));
    if (l.bandwidth_kbps <= 0) throw ConfigError("link bandwidth must be positive");
    if (!(l.distance_km >= 0.0)) throw ConfigError("link distance must be non-negative");
    if (find_link(l.a, l.b)) {
      throw ConfigError("duplicate link " + std::to_string(l.a) + "-" + std::to_string(l.b));
    }
    adjacency_[l.a].push_back({l.b, i});
    adjacency_[l.b].push_back({l.a, i});
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end(),
              [](const Adjacency& x, const Adjacency& y) { return x.neighbor < y.neighbor; });
  }
  if (!is_connected(n, links_)) throw ConfigError("network topology is disconnected");
}

std::optional<int> NetworkGraph::find_link(int a, int b) const {
  if (a < 0 || a >= dc_count()) return std::nullopt;
  for (const auto& adj : adjacency_[a])
    if (adj.neighbor == b) return adj.link;
  return std::nullopt;
}

NetworkGraph build_network(const TopologyConfig& config) {
  std::vector<DataCenterSpec> dcs;
  std::vector<LinkSpec> links;

  if (!config.dcs.empty()) {
    dcs = config.dcs;
    if (dcs.size() < 2) throw ConfigError("topology needs at least 2 data centers");
    for (const auto& dc : dcs) check_capacities(dc);
    for (const auto& e : config.links) {
      if (e.a < 0 || e.b < 0 || e.a >= static_cast<int>(dcs.size()) ||
          e.b >= static_cast<int>(dcs.size()))
        throw ConfigError("link endpoint out of range");
      LinkSpec l;
      l.a = std::min(e.a, e.b);
      l.b = std::max(e.a, e.b);
      l.bandwidth_kbps = e.bandwidth_kbps.value_or(config.link_bandwidth_kbps);
      const double euclid = distance_km(dcs[l.a].position, dcs[l.b].position);
      l.distance_km = e.distance_km.value_or(euclid);
      if (l.distance_km < euclid)
        throw ConfigError("link distance shorter than the straight line between its endpoints");
      links.push_back(l);
    }
    return NetworkGraph(std::move(dcs), std::move(links));
  }

  const int n = config.dc_count;
  if (n < 2) throw ConfigError("topology needs at least 2 data centers");
  if (config.storage_gb <= 0 || config.vcpu <= 0 || config.ram_gb <= 0)
    throw ConfigError("data center capacities must be positive");
  if (config.link_bandwidth_kbps <= 0) throw ConfigError("link bandwidth must be positive");
  if (!(config.area_km > 0.0)) throw ConfigError("area must be positive");

  Rng rng(config.seed);
  dcs.resize(n);
  for (int i = 0; i < n; ++i) {
    dcs[i].id = i;
    dcs[i].position = {rng.uniform(0.0, config.area_km), rng.uniform(0.0, config.area_km)};
    dcs[i].storage_gb = config.storage_gb;
    dcs[i].vcpu = config.vcpu;
    dcs[i].ram_gb = config.ram_gb;
  }

  // All pairs ordered by distance, ties by (a, b); used for the radius rule
  // and for the repair pass.
  std::vector<std::tuple<double, int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      pairs.emplace_back(distance_km(dcs[a].position, dcs[b].position), a, b);

  DisjointSets sets(n);
  std::vector<char> linked(static_cast<std::size_t>(n) * n, 0);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double d = distance_km(dcs[a].position, dcs[b].position);
      if (d <= config.radius_km) {
        links.push_back({0, a, b, config.link_bandwidth_kbps, d});
        linked[a * n + b] = 1;
        sets.unite(a, b);
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [d, a, b] : pairs) {
    if (linked[a * n + b]) continue;
    if (sets.unite(a, b)) links.push_back({0, a, b, config.link_bandwidth_kbps, d});
  }
  return NetworkGraph(std::move(dcs), std::move(links));
}

std::vector<std::vector<int>> cluster_adjacency(const NetworkGraph& graph,
                                                const std::vector<int>& assignment,
                                                int cluster_count) {
  std::vector<std::vector<int>> adj(cluster_count);
  for (const auto& l : graph.links()) {
    const int ca = assignment[l.a];
    const int cb = assignment[l.b];
    if (ca == cb) continue;
    adj[ca].push_back(cb);
    adj[cb].push_back(ca);
  }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return adj;
}

}  // namespace sfcsim
