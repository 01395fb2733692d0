#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sfcsim {

struct Point {
  double x_km = 0.0;
  double y_km = 0.0;
};

double distance_km(Point a, Point b);

struct DataCenterSpec {
  int id = 0;
  Point position;
  int storage_gb = 2048;
  int vcpu = 40;
  int ram_gb = 256;
};

// Undirected link, stored with a < b. Bandwidth is kept in integer kbps so
// reservation accounting is exact.
struct LinkSpec {
  int id = 0;
  int a = 0;
  int b = 0;
  std::int64_t bandwidth_kbps = 1'000'000;
  double distance_km = 0.0;

  int other(int dc) const { return dc == a ? b : a; }
};

struct Adjacency {
  int neighbor = 0;
  int link = 0;
};

class NetworkGraph {
 public:
  NetworkGraph() = default;
  // Validates ids, capacities, endpoints, duplicates and connectivity; throws ConfigError.
  NetworkGraph(std::vector<DataCenterSpec> dcs, std::vector<LinkSpec> links);

  int dc_count() const { return static_cast<int>(dcs_.size()); }
  int link_count() const { return static_cast<int>(links_.size()); }
  const std::vector<DataCenterSpec>& dcs() const { return dcs_; }
  const DataCenterSpec& dc(int id) const { return dcs_.at(id); }
  const std::vector<LinkSpec>& links() const { return links_; }
  const LinkSpec& link(int id) const { return links_.at(id); }
  std::span<const Adjacency> neighbors(int dc) const { return adjacency_.at(dc); }
  std::optional<int> find_link(int a, int b) const;

 private:
  std::vector<DataCenterSpec> dcs_;
  std::vector<LinkSpec> links_;
  std::vector<std::vector<Adjacency>> adjacency_;
};

bool is_connected(int node_count, const std::vector<LinkSpec>& links);

struct ExplicitLink {
  int a = 0;
  int b = 0;
  std::optional<std::int64_t> bandwidth_kbps;
  std::optional<double> distance_km;
};

struct TopologyConfig {
  int dc_count = 20;
  double area_km = 1000.0;
  double radius_km = 400.0;
  int storage_gb = 2048;
  int vcpu = 40;
  int ram_gb = 256;
  std::int64_t link_bandwidth_kbps = 1'000'000;
  std::uint64_t seed = 1;
  // When `dcs` is non-empty the topology is taken verbatim from dcs/links.
  std::vector<DataCenterSpec> dcs;
  std::vector<ExplicitLink> links;
};

// Random geometric graph (radius rule plus shortest repair edges until
// connected) or the explicit topology from the config.
NetworkGraph build_network(const TopologyConfig& config);

struct ClusterPartition {
  int size_limit = 0;
  std::vector<int> assignment;                // dc -> cluster
  std::vector<std::vector<int>> clusters;     // cluster -> sorted dc ids
  std::vector<Point> centroids;
  std::vector<std::vector<int>> intra_links;  // cluster -> link ids
  std::vector<int> inter_links;
  std::vector<std::vector<int>> adjacency;    // cluster graph, sorted neighbor lists
  int iterations = 0;

  int cluster_count() const { return static_cast<int>(clusters.size()); }
  int cluster_of(int dc) const { return assignment.at(dc); }
  bool is_inter(const LinkSpec& link) const { return assignment[link.a] != assignment[link.b]; }
};

struct ClusteringOptions {
  int max_iterations = 100;
  double tolerance_km = 1e-9;
};

// Size-bounded k-means: k = ceil(N / size_limit), k-means++ seeding, Lloyd
// iterations whose assignment step is greedy and capacity-respecting.
ClusterPartition make_clusters(const NetworkGraph& graph, int size_limit, std::uint64_t seed,
                               const ClusteringOptions& options = {});

// Cluster-level graph: edge (a, b) iff an inter-cluster link joins them.
std::vector<std::vector<int>> cluster_adjacency(const NetworkGraph& graph,
                                                const std::vector<int>& assignment,
                                                int cluster_count);

}  // namespace sfcsim
