#include "sfcsim/sim.hpp"

#include <algorithm>
#include <stdexcept>

namespace sfcsim {

namespace {

enum Stream : std::uint64_t { kTopology = 1, kClustering = 2, kWorkload = 3, kAgents = 4 };

}  // namespace

Scenario make_scenario(const TopologyConfig& topology, int cluster_limit, double scale,
                       const Catalog& catalog, std::uint64_t seed,
                       const ClusteringOptions& clustering) {
  Scenario s;
  auto topo = topology;
  topo.seed = mix_seed(seed, kTopology);
  s.graph = build_network(topo);
  s.partition = make_clusters(s.graph, std::min(cluster_limit, s.graph.dc_count()),
                              mix_seed(seed, kClustering), clustering);
  s.catalog = catalog;
  Rng rng(mix_seed(seed, kWorkload));
  s.requests = generate_bundles(catalog, s.graph.dc_count(), scale, rng);
  s.seed = seed;
  s.scale = scale;
  return s;
}

void TypeCounts::merge(const TypeCounts& other) {
  generated += other.generated;
  accepted += other.accepted;
  dropped += other.dropped;
  e2e_sum_ms += other.e2e_sum_ms;
}

std::optional<double> EpisodeReport::acceptance_ratio() const {
  if (generated == 0) return std::nullopt;
  return static_cast<double>(accepted) / static_cast<double>(generated);
}

std::optional<double> EpisodeReport::mean_e2e_ms(int sfc) const {
  const auto& c = per_type.at(sfc);
  if (c.accepted == 0) return std::nullopt;
  return c.e2e_sum_ms / static_cast<double>(c.accepted);
}

EpisodeReport build_report(const World& world, int cluster_limit, std::uint64_t seed, double scale,
                           long steps) {
  EpisodeReport rep;
  const int types = static_cast<int>(world.catalog.sfcs.size());
  rep.seed = seed;
  rep.dc_count = world.graph.dc_count();
  rep.cluster_limit = cluster_limit;
  rep.cluster_count = world.partition.cluster_count();
  rep.scale = scale;
  rep.steps = steps;
  rep.per_cluster.assign(rep.cluster_count, std::vector<TypeCounts>(types));
  rep.per_type.assign(types, {});
  for (const auto& r : world.requests) {
    auto& cell = rep.per_cluster[r.origin_cluster][r.sfc];
    ++cell.generated;
    if (r.status == RequestStatus::Accepted) {
      ++cell.accepted;
      cell.e2e_sum_ms += r.ledger.accrued();
    } else if (r.status == RequestStatus::Dropped) {
      ++cell.dropped;
      ++rep.drop_reasons[static_cast<int>(r.drop_reason)];
    }
  }
  for (const auto& row : rep.per_cluster)
    for (int s = 0; s < types; ++s) rep.per_type[s].merge(row[s]);
  for (const auto& t : rep.per_type) {
    rep.generated += t.generated;
    rep.accepted += t.accepted;
    rep.dropped += t.dropped;
  }
  for (const auto& st : world.stats) {
    rep.reward_total += st.reward_total;
    rep.accept_rewards += st.accept_rewards;
    rep.drop_rewards += st.drop_rewards;
    rep.actions += st.actions;
    rep.invalid_actions += st.invalid;
  }
  rep.handoffs = static_cast<long>(world.handoffs.size());
  rep.handoff_log = world.handoffs;
  rep.dijkstra_calls = world.counters.dijkstra_calls;
  rep.max_settled = world.counters.max_settled;
  rep.dfs_edges_visited = world.counters.dfs_edges_visited;
  return rep;
}

Episode::Episode(Scenario scenario, const SimOptions& options, PolicyRef policy, bool record)
    : world_(std::move(scenario.graph), std::move(scenario.partition), std::move(scenario.catalog),
             std::move(scenario.requests), options),
      seed_(scenario.seed),
      scale_(scenario.scale) {
  options.validate();
  const Rng base(mix_seed(seed_, kAgents));
  for (int c = 0; c < world_.partition.cluster_count(); ++c)
    agents_.emplace_back(c, policy, base.derive(static_cast<std::uint64_t>(c)), record);
}

void Episode::run_step(std::span<const int> agent_order) {
  if (agent_order.empty()) {
    for (auto& agent : agents_) agent.run_phase(world_);
  } else {
    if (agent_order.size() != agents_.size()) throw std::invalid_argument("agent order size mismatch");
    for (int c : agent_order) agents_.at(c).run_phase(world_);
  }
  general_.run_phase(world_, agents_, world_.now + world_.options.step_ms);
  clock_phase();
  ++steps_;
}

void Episode::clock_phase() {
  world_.now += world_.options.step_ms;
  const double now = world_.now;
  auto& state = world_.state;
  state.settle(now);
  state.release_due(now);

  for (auto& r : world_.requests) {
    if (world_.options.bw_hold == BandwidthHold::WholeLifetime && r.terminal() &&
        !world_.bandwidth_released[r.id] && r.finished_at <= now) {
      state.release_bandwidth(r.id);
      world_.bandwidth_released[r.id] = 1;
    }
    if (r.terminal() || r.awaiting_assist) continue;
    const double tolerance = world_.catalog.sfcs[r.sfc].tolerance_ms;
    const double lb = world_.lower_bound_at(r, now);
    const bool expired = world_.options.eager_drop ? lb > tolerance
                                                   : now - r.arrival_ms > tolerance;
    if (!expired) continue;
    agents_[r.holder_cluster].spread(finalize_drop(world_, r, DropReason::Deadline, lb));
  }

  for (auto& q : world_.queues)
    std::erase_if(q, [&](int id) { return world_.requests[id].terminal(); });
}

EpisodeReport Episode::run(const StepHook& hook) {
  while (!done()) {
    if (steps_ >= world_.options.max_steps)
      throw std::runtime_error("episode exceeded sim.max_steps without finishing");
    run_step();
    if (hook) hook(world_);
  }
  return build_report(world_, world_.partition.size_limit, seed_, scale_, steps_);
}

std::vector<Transition> Episode::take_transitions() {
  std::vector<Transition> out;
  for (auto& agent : agents_) {
    agent.close_episode();
    auto& ts = agent.transitions();
    std::move(ts.begin(), ts.end(), std::back_inserter(out));
    ts.clear();
  }
  return out;
}

}  // namespace sfcsim
