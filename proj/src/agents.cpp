#include "sfcsim/agents.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "sfcsim/encoding.hpp"
#include "sfcsim/error.hpp"

namespace sfcsim {

void SimOptions::validate() const {
  if (!(step_ms > 0.0)) throw ConfigError("sim.step_ms must be positive");
  if (actions_per_step <= 0) throw ConfigError("sim.actions_per_step must be positive");
  if (!(action_cost_ms > 0.0)) throw ConfigError("sim.action_cost_ms must be positive");
  if (actions_per_step * action_cost_ms > step_ms * (1.0 + 1e-12))
    throw ConfigError("sim: actions_per_step * action_cost_ms exceeds step_ms");
  if (max_steps <= 0) throw ConfigError("sim.max_steps must be positive");
}

World::World(NetworkGraph g, ClusterPartition p, Catalog c, std::vector<SfcRequest> reqs,
             SimOptions opts)
    : graph(std::move(g)),
      partition(std::move(p)),
      catalog(std::move(c)),
      state(graph, catalog),
      requests(std::move(reqs)),
      queues(partition.cluster_count()),
      bandwidth_released(requests.size(), 0),
      options(opts),
      stats(partition.cluster_count()) {
  for (std::size_t i = 0; i < requests.size(); ++i) {
    auto& r = requests[i];
    if (r.id != static_cast<int>(i)) throw std::invalid_argument("request ids must be dense 0..n-1");
    reset_runtime(r);
    r.origin_cluster = partition.cluster_of(r.source_dc);
    r.holder_cluster = r.origin_cluster;
    queues[r.holder_cluster].push_back(r.id);
  }
}

bool World::all_terminal() const {
  return std::all_of(requests.begin(), requests.end(), [](const auto& r) { return r.terminal(); });
}

double World::lower_bound_at(const SfcRequest& r, double t) const {
  return r.elapsed_at(std::max(t, r.ready_at)) + catalog.remaining_proc_ms(r.sfc, r.next_vnf);
}

int World::remaining_requests() const {
  return static_cast<int>(
      std::count_if(requests.begin(), requests.end(), [](const auto& r) { return !r.terminal(); }));
}

bool World::cluster_can_host(int cluster, int vnf) const {
  for (int d : partition.clusters[cluster])
    if (state.has_instance(d, vnf) || state.can_place(d, vnf)) return true;
  return false;
}

double priority_points(const World& world, const SfcRequest& r, double t) {
  const double tolerance = world.catalog.sfcs[r.sfc].tolerance_ms;
  const double slack =
      tolerance - r.elapsed_at(t) - world.catalog.remaining_proc_ms(r.sfc, r.next_vnf);
  return 1.0 - slack / tolerance;
}

std::vector<int> priority_rank(const World& world, std::vector<int> candidates, double t) {
  std::vector<std::tuple<double, double, int>> keys;
  keys.reserve(candidates.size());
  for (int id : candidates) {
    const auto& r = world.requests[id];
    keys.emplace_back(-priority_points(world, r, t), r.arrival_ms, r.id);
  }
  std::sort(keys.begin(), keys.end());
  for (std::size_t i = 0; i < keys.size(); ++i) candidates[i] = std::get<2>(keys[i]);
  return candidates;
}

double finalize_accept(World& world, SfcRequest& r) {
  if (r.terminal()) throw std::logic_error("finalize on a terminal request");
  r.status = RequestStatus::Accepted;
  r.awaiting_assist = false;
  r.finished_at = r.arrival_ms + r.ledger.accrued();
  ++world.stats[r.origin_cluster].accepted[r.sfc];
  auto& holder = world.stats[r.holder_cluster];
  ++holder.accept_rewards;
  holder.reward_total += world.options.rewards.accept;
  return world.options.rewards.accept;
}

double finalize_drop(World& world, SfcRequest& r, DropReason reason, double lower_bound) {
  if (r.terminal()) throw std::logic_error("finalize on a terminal request");
  r.status = RequestStatus::Dropped;
  r.drop_reason = reason;
  r.drop_lower_bound = lower_bound;
  r.awaiting_assist = false;
  r.finished_at = std::max(world.now, r.ready_at);
  ++world.stats[r.origin_cluster].dropped[r.sfc];
  auto& holder = world.stats[r.holder_cluster];
  ++holder.drop_rewards;
  holder.reward_total += world.options.rewards.drop;
  return world.options.rewards.drop;
}

double judge(World& world, SfcRequest& r) {
  const double e2e = r.ledger.accrued();
  if (e2e <= world.catalog.sfcs[r.sfc].tolerance_ms) return finalize_accept(world, r);
  return finalize_drop(world, r, DropReason::Deadline, e2e);
}

LocalAgent::LocalAgent(int cluster, PolicyRef policy, Rng rng, bool record)
    : cluster_(cluster), policy_(policy), rng_(std::move(rng)), record_(record) {}

void LocalAgent::credit(int transition, double reward) {
  if (!record_) return;
  if (transition >= 0) {
    transitions_.at(transition).reward += reward;
  } else if (!transitions_.empty()) {
    transitions_.back().reward += reward;
  } else {
    carried_reward_ += reward;
  }
}

void LocalAgent::spread(double reward) {
  if (!record_) return;
  if (transitions_.empty())
    carried_reward_ += reward;
  else if (unproductive_.empty())
    spread_.push_back({reward, transitions_.size(), true});
  else
    spread_.push_back({reward, unproductive_.size(), false});
}

void LocalAgent::close_episode() {
  // Difference arrays over the two index spaces.
  std::vector<double> all(transitions_.size() + 1, 0.0);
  std::vector<double> some(unproductive_.size() + 1, 0.0);
  for (const auto& sp : spread_) {
    auto& diff = sp.all ? all : some;
    const double part = sp.reward / static_cast<double>(sp.count);
    diff[0] += part;
    diff[sp.count] -= part;
  }
  double running = 0.0;
  for (std::size_t i = 0; i < transitions_.size(); ++i) {
    running += all[i];
    transitions_[i].reward += running;
  }
  running = 0.0;
  for (std::size_t i = 0; i < unproductive_.size(); ++i) {
    running += some[i];
    transitions_[unproductive_[i]].reward += running;
  }
  spread_.clear();
  unproductive_.clear();
  if (transitions_.empty()) return;
  auto& last = transitions_.back();
  last.terminal = true;
  last.next = last.state;
}

void LocalAgent::queue_assist(Assist::Kind kind, int request, int transition) {
  assists_.push_back({kind, cluster_, sequence_++, request, transition});
}

int LocalAgent::select_dc(const World& world, double t) {
  const auto& members = world.partition.clusters[cluster_];
  if (world.options.dc_selection == DcSelection::RoundRobin) {
    const int dc = members[cursor_ % members.size()];
    cursor_ = static_cast<int>((cursor_ + 1) % members.size());
    return dc;
  }
  std::vector<int> pending(members.size(), 0);
  for (int id : world.queues[cluster_]) {
    const auto& r = world.requests[id];
    if (r.terminal() || r.awaiting_assist || r.ready_at > t) continue;
    if (r.next_vnf >= world.catalog.sfcs[r.sfc].length()) continue;
    const auto it = std::lower_bound(members.begin(), members.end(), r.location);
    if (it != members.end() && *it == r.location) ++pending[it - members.begin()];
  }
  return members[std::max_element(pending.begin(), pending.end()) - pending.begin()];
}

void LocalAgent::scope_scan(World& world, double t) {
  // A failed transfer is charged to the action that left the cluster in this state.
  const int last = static_cast<int>(transitions_.size()) - 1;
  for (int id : world.queues[cluster_]) {
    auto& r = world.requests[id];
    if (r.terminal() || r.awaiting_assist || r.ready_at > t) continue;
    const auto& type = world.catalog.sfcs[r.sfc];
    if (r.next_vnf >= type.length()) continue;
    if (world.options.eager_drop) {
      const double lb = world.lower_bound_at(r, t);
      if (lb > type.tolerance_ms) {
        spread(finalize_drop(world, r, DropReason::Deadline, lb));
        continue;
      }
    }
    if (!world.cluster_can_host(cluster_, type.chain[r.next_vnf])) {
      r.awaiting_assist = true;
      ++world.stats[cluster_].assists;
      queue_assist(Assist::Kind::Transfer, id, last);
    }
  }
}

void LocalAgent::run_phase(World& world) {
  auto has_work = [&] {
    for (int id : world.queues[cluster_]) {
      const auto& r = world.requests[id];
      if (!r.terminal() && !r.awaiting_assist) return true;
    }
    return false;
  };
  if (!has_work()) return;
  scope_scan(world, world.now);
  for (int j = 0; j < world.options.actions_per_step; ++j) {
    if (!has_work()) break;
    const double t = world.now + j * world.options.action_cost_ms;
    const auto outcome = local_step(world, t);
    if (outcome.invalid && world.options.invalid_blocks_step) break;
    if (outcome.action == 2 * static_cast<int>(world.catalog.vnfs.size()) &&
        world.options.idle_ends_step)
      break;
  }
}

ActionOutcome LocalAgent::local_step(World& world, double t) {
  const int dc = select_dc(world, t);
  const int vnf_kinds = static_cast<int>(world.catalog.vnfs.size());
  const int actions = 2 * vnf_kinds + 1;

  int transition = -1;
  int action = 0;
  auto choose = [&](const StateEncoding* s) {
    if (policy_.rule) return rule_action(world, cluster_, dc, t);
    if (policy_.net) return act(*policy_.net, *s, policy_.epsilon, rng_);
    return static_cast<int>(rng_.uniform_int(0, actions - 1));
  };
  if (policy_.net || record_) {
    auto s = encode_state(world, cluster_, dc, t);
    action = choose(&s);
    if (record_) {
      if (!transitions_.empty()) transitions_.back().next = s;
      transitions_.push_back({std::move(s), action, carried_reward_, {}, false});
      carried_reward_ = 0.0;
      transition = static_cast<int>(transitions_.size()) - 1;
    }
  } else {
    action = choose(nullptr);
  }

  auto& stats = world.stats[cluster_];
  ++stats.actions;
  ActionOutcome outcome;
  if (action < vnf_kinds) {
    outcome = place(world, dc, action, t, transition);
  } else if (action < 2 * vnf_kinds) {
    outcome = uninstall(world, dc, action - vnf_kinds, t);
  } else {
    ++stats.idle;
    outcome.reward = world.options.rewards.idle;
    stats.reward_total += outcome.reward;
  }
  outcome.action = action;
  if (outcome.invalid) {
    ++stats.invalid;
    outcome.reward = world.options.rewards.invalid;
    stats.reward_total += outcome.reward;
  }
  if (transition >= 0) {
    transitions_[transition].reward += outcome.reward;
    if (outcome.invalid || action >= vnf_kinds) unproductive_.push_back(transition);
  }
  return outcome;
}

ActionOutcome LocalAgent::place(World& world, int dc, int vnf, double t, int transition) {
  ActionOutcome out;
  auto& state = world.state;
  const auto idle = state.idle_instance(dc, vnf, t);
  if (!idle && !state.can_place(dc, vnf)) {
    out.invalid = true;
    return out;
  }

  std::vector<int> candidates;
  for (int id : world.queues[cluster_]) {
    const auto& r = world.requests[id];
    if (r.terminal() || r.awaiting_assist || r.ready_at > t) continue;
    const auto& type = world.catalog.sfcs[r.sfc];
    if (r.next_vnf >= type.length() || type.chain[r.next_vnf] != vnf) continue;
    if (world.options.eager_drop && world.lower_bound_at(r, t) > type.tolerance_ms) continue;
    candidates.push_back(id);
  }
  if (candidates.empty()) {
    out.invalid = true;
    return out;
  }

  const auto& members = world.partition.clusters[cluster_];
  const bool whole_lifetime = world.options.bw_hold == BandwidthHold::WholeLifetime;
  int chosen = -1;
  PathResult inbound;
  std::optional<PathResult> last_mile;
  for (int id : priority_rank(world, std::move(candidates), t)) {
    auto& r = world.requests[id];
    const auto& type = world.catalog.sfcs[r.sfc];
    last_mile.reset();
    auto path = d2d_shortest_path(world.graph, members, state.free_bandwidth(), r.location, dc,
                                  r.bandwidth_kbps, &world.counters);
    if (!path) continue;
    const double prop = propagation_delay_ms(path->distance_km);
    int seq = -1;
    if (!path->links.empty()) {
      seq = ++r.transfer_seq;
      state.reserve_bandwidth(path->links, r.id, seq, r.bandwidth_kbps,
                              whole_lifetime ? kHoldForever : t + prop, cluster_);
    }
    const bool last = r.next_vnf + 1 == type.length();
    const bool dest_inside = world.partition.cluster_of(r.dest_dc) == cluster_;
    if (last && world.options.count_last_mile && dest_inside) {
      last_mile = d2d_shortest_path(world.graph, members, state.free_bandwidth(), dc, r.dest_dc,
                                    r.bandwidth_kbps, &world.counters);
      if (!last_mile) {
        if (seq >= 0) state.release_transfer(r.id, seq);
        continue;
      }
    }
    chosen = id;
    inbound = std::move(*path);
    break;
  }
  if (chosen < 0) {
    out.invalid = true;
    return out;
  }

  auto& stats = world.stats[cluster_];
  InstanceId instance;
  if (idle) {
    instance = *idle;
  } else {
    instance = *state.place_vnf(dc, vnf, cluster_);
    ++stats.installs;
  }
  auto& r = world.requests[chosen];
  const auto& type = world.catalog.sfcs[r.sfc];
  const auto record = state.allocate(r, r.next_vnf, instance, t,
                                     propagation_delay_ms(inbound.distance_km), r.location);
  ++stats.allocations;
  if (r.next_vnf < type.length()) return out;

  if (!world.options.count_last_mile) {
    out.reward = judge(world, r);
  } else if (last_mile) {
    if (!last_mile->links.empty()) {
      const double prop = propagation_delay_ms(last_mile->distance_km);
      const int seq = ++r.transfer_seq;
      if (!state.reserve_bandwidth(last_mile->links, r.id, seq, r.bandwidth_kbps,
                                   whole_lifetime ? kHoldForever : record.finish + prop, cluster_))
        throw std::logic_error("last-mile reservation failed after a feasible path check");
      r.ledger.add({HopKind::Delivery, dc, r.dest_dc, record.finish, 0.0, prop, 0.0});
      r.location = r.dest_dc;
    }
    out.reward = judge(world, r);
  } else {
    r.awaiting_assist = true;
    ++stats.assists;
    queue_assist(Assist::Kind::Deliver, r.id, transition);
    out.status = -1;
    return out;
  }
  out.accepted_sfc = r.status == RequestStatus::Accepted;
  out.dropped_sfc = r.status == RequestStatus::Dropped;
  return out;
}

ActionOutcome LocalAgent::uninstall(World& world, int dc, int vnf, double t) {
  ActionOutcome out;
  const auto idle = world.state.idle_instance(dc, vnf, t);
  if (!idle) {
    out.invalid = true;
    return out;
  }
  bool needed = false;
  for (int id : world.queues[cluster_]) {
    const auto& r = world.requests[id];
    if (r.terminal()) continue;
    const auto& type = world.catalog.sfcs[r.sfc];
    if (r.next_vnf < type.length() && type.chain[r.next_vnf] == vnf) {
      needed = true;
      break;
    }
  }
  world.state.uninstall_vnf(*idle, t, needed);
  auto& stats = world.stats[cluster_];
  ++stats.uninstalls;
  if (needed) {
    ++stats.needed_uninstalls;
    out.uninstalled_needed = true;
    out.reward = world.options.rewards.uninstall_needed;
    stats.reward_total += out.reward;
  }
  return out;
}

void GeneralAgent::run_phase(World& world, std::vector<LocalAgent>& agents, double t) {
  for (auto& agent : agents) {
    // Assists are queued in sequence order, so this is FIFO by (agent, sequence).
    for (const auto& a : agent.assists()) {
      if (world.requests[a.request].terminal()) continue;
      if (a.kind == Assist::Kind::Deliver)
        deliver(world, agent, a, t);
      else
        transfer(world, agent, a, t);
    }
    agent.assists().clear();
  }
}

void GeneralAgent::deliver(World& world, LocalAgent& agent, const Assist& a, double t) {
  auto& r = world.requests[a.request];
  auto& state = world.state;
  const auto path = find_path(world.graph, world.partition, state.free_bandwidth(), r.location,
                              r.dest_dc, r.bandwidth_kbps, &world.counters);
  if (!path) {
    agent.credit(a.transition, finalize_drop(world, r, DropReason::NoPath, r.ledger.accrued()));
    return;
  }
  const double start = std::max(r.ready_at, t);
  const double prop = propagation_delay_ms(path->distance_km);
  const bool whole_lifetime = world.options.bw_hold == BandwidthHold::WholeLifetime;
  if (!path->links.empty())
    state.reserve_bandwidth(path->links, r.id, ++r.transfer_seq, r.bandwidth_kbps,
                            whole_lifetime ? kHoldForever : start + prop, kGeneralActor);
  r.ledger.add({HopKind::Delivery, r.location, r.dest_dc, t, start - r.ready_at, prop, 0.0});
  r.location = r.dest_dc;
  r.awaiting_assist = false;
  agent.credit(a.transition, judge(world, r));
}

void GeneralAgent::transfer(World& world, LocalAgent& agent, const Assist& a, double t) {
  auto& r = world.requests[a.request];
  auto& state = world.state;
  const int vnf = world.catalog.sfcs[r.sfc].chain[r.next_vnf];
  const int from = r.holder_cluster;

  auto free_vcpu = [&](int c) {
    long total = 0;
    for (int d : world.partition.clusters[c]) total += state.dc(d).free.vcpu;
    return total;
  };
  std::vector<int> candidates;
  for (int c : world.partition.adjacency[from])
    if (world.cluster_can_host(c, vnf)) candidates.push_back(c);
  if (candidates.empty())
    for (int c = 0; c < world.partition.cluster_count(); ++c)
      if (c != from && world.cluster_can_host(c, vnf)) candidates.push_back(c);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](int x, int y) { return free_vcpu(x) > free_vcpu(y); });

  for (int c : candidates) {
    int target = -1;
    for (int d : world.partition.clusters[c]) {
      if (!state.has_instance(d, vnf) && !state.can_place(d, vnf)) continue;
      if (target < 0 || state.dc(d).free.vcpu > state.dc(target).free.vcpu) target = d;
    }
    const auto path = find_path(world.graph, world.partition, state.free_bandwidth(), r.location,
                                target, r.bandwidth_kbps, &world.counters);
    if (!path) continue;

    const double start = std::max(r.ready_at, t);
    const double prop = propagation_delay_ms(path->distance_km);
    const bool whole_lifetime = world.options.bw_hold == BandwidthHold::WholeLifetime;
    if (!path->links.empty())
      state.reserve_bandwidth(path->links, r.id, ++r.transfer_seq, r.bandwidth_kbps,
                              whole_lifetime ? kHoldForever : start + prop, kGeneralActor);
    r.ledger.add({HopKind::Transfer, r.location, target, t, start - r.ready_at, prop, 0.0});
    r.location = target;
    r.ready_at = start + prop;
    r.holder_cluster = c;
    r.awaiting_assist = false;
    auto& q = world.queues[from];
    q.erase(std::find(q.begin(), q.end(), r.id));
    world.queues[c].push_back(r.id);
    world.handoffs.push_back({r.id, from, c, t});
    return;
  }
  agent.credit(a.transition, finalize_drop(world, r, DropReason::NoHost, world.lower_bound_at(r, t)));
}

int rule_action(const World& world, int cluster, int dc, double t) {
  const int vnf_kinds = static_cast<int>(world.catalog.vnfs.size());
  std::vector<int> ready;
  std::vector<char> wanted(vnf_kinds, 0);
  for (int id : world.queues[cluster]) {
    const auto& r = world.requests[id];
    if (r.terminal() || r.awaiting_assist) continue;
    const auto& type = world.catalog.sfcs[r.sfc];
    if (r.next_vnf >= type.length()) continue;
    wanted[type.chain[r.next_vnf]] = 1;
    if (r.ready_at <= t) ready.push_back(id);
  }
  for (int id : priority_rank(world, std::move(ready), t)) {
    const auto& r = world.requests[id];
    const int v = world.catalog.sfcs[r.sfc].chain[r.next_vnf];
    if (world.state.idle_instance(dc, v, t) || world.state.can_place(dc, v)) return v;
  }
  for (int v = 0; v < vnf_kinds; ++v)
    if (!wanted[v] && world.state.idle_instance(dc, v, t)) return vnf_kinds + v;
  return 2 * vnf_kinds;
}

SystemSnapshot collect(const World& world) {
  SystemSnapshot snap;
  snap.agents = world.stats;
  snap.counters = world.counters;
  long cap = 0;
  long used = 0;
  for (int d = 0; d < world.state.dc_count(); ++d) {
    const auto& rt = world.state.dc(d);
    cap += rt.capacity.vcpu;
    used += rt.capacity.vcpu - rt.free.vcpu;
    for (int v = 0; v < static_cast<int>(world.catalog.vnfs.size()); ++v)
      snap.installed_instances += world.state.instance_count(d, v);
  }
  snap.vcpu_utilization = cap ? static_cast<double>(used) / cap : 0.0;
  std::int64_t bw_cap = 0;
  std::int64_t bw_used = 0;
  for (int l = 0; l < world.graph.link_count(); ++l) {
    bw_cap += world.state.link(l).capacity_kbps;
    bw_used += world.state.link(l).capacity_kbps - world.state.free_kbps(l);
  }
  snap.bandwidth_utilization = bw_cap ? static_cast<double>(bw_used) / bw_cap : 0.0;
  return snap;
}

}  // namespace sfcsim
