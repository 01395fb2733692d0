#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sfcsim/agents.hpp"

namespace sfcsim {

// One evaluation or training instance: substrate, partition and workload.
struct Scenario {
  NetworkGraph graph;
  ClusterPartition partition;
  Catalog catalog;
  std::vector<SfcRequest> requests;
  std::uint64_t seed = 0;
  double scale = 0.0;
};

// Topology, clustering and workload each draw from their own stream of `seed`,
// so changing the cluster limit keeps the same network and requests.
Scenario make_scenario(const TopologyConfig& topology, int cluster_limit, double scale,
                       const Catalog& catalog, std::uint64_t seed,
                       const ClusteringOptions& clustering = {});

struct TypeCounts {
  long generated = 0;
  long accepted = 0;
  long dropped = 0;
  double e2e_sum_ms = 0.0;  // over accepted requests

  void merge(const TypeCounts& other);
};

struct EpisodeReport {
  std::uint64_t seed = 0;
  int dc_count = 0;
  int cluster_limit = 0;
  int cluster_count = 0;
  double scale = 0.0;
  std::vector<std::vector<TypeCounts>> per_cluster;  // origin cluster x SFC type
  std::vector<TypeCounts> per_type;
  long generated = 0;
  long accepted = 0;
  long dropped = 0;
  std::vector<long> drop_reasons = std::vector<long>(4, 0);
  long steps = 0;
  double reward_total = 0.0;
  long accept_rewards = 0;
  long drop_rewards = 0;
  long actions = 0;
  long invalid_actions = 0;
  long handoffs = 0;
  long dijkstra_calls = 0;
  int max_settled = 0;
  long dfs_edges_visited = 0;
  std::vector<HandoffRecord> handoff_log;

  bool empty_workload() const { return generated == 0; }
  // accepted / generated; nullopt for an empty workload.
  std::optional<double> acceptance_ratio() const;
  std::optional<double> mean_e2e_ms(int sfc) const;
};

EpisodeReport build_report(const World& world, int cluster_limit, std::uint64_t seed, double scale,
                           long steps);

using StepHook = std::function<void(const World&)>;

// Discrete-time engine. Each step: every local agent takes up to
// actions_per_step actions (clusters in id order; they touch disjoint state),
// then the general agent serves the assist queue, then the clock advances,
// finished work is settled and expired requests are dropped.
class Episode {
 public:
  Episode(Scenario scenario, const SimOptions& options, PolicyRef policy, bool record);

  // `agent_order` permutes the phase-1 agent schedule; empty means cluster id order.
  void run_step(std::span<const int> agent_order = {});
  bool done() const { return world_.all_terminal(); }
  // Runs to completion; `hook` sees the world after every step.
  EpisodeReport run(const StepHook& hook = {});

  const World& world() const { return world_; }
  World& world() { return world_; }
  std::vector<LocalAgent>& agents() { return agents_; }
  long steps() const { return steps_; }
  // Closes every agent's transition list and moves them out.
  std::vector<Transition> take_transitions();

 private:
  void clock_phase();

  World world_;
  std::vector<LocalAgent> agents_;
  GeneralAgent general_;
  std::uint64_t seed_;
  double scale_;
  long steps_ = 0;
};

}  // namespace sfcsim
