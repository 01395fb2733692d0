#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sfcsim/nfv_state.hpp"
#include "sfcsim/qnetwork.hpp"
#include "sfcsim/routing.hpp"
#include "sfcsim/topology.hpp"
#include "sfcsim/workload.hpp"

namespace sfcsim {

enum class BandwidthHold { PerTransfer, WholeLifetime };
enum class DcSelection { RoundRobin, MostPending };

struct RewardConfig {
  double accept = 2.0;
  double drop = -1.5;
  double uninstall_needed = -0.5;
  double invalid = -1.0;
  double idle = 0.0;
};

struct SimOptions {
  double step_ms = 1.0;
  int actions_per_step = 100;
  double action_cost_ms = 0.01;
  BandwidthHold bw_hold = BandwidthHold::PerTransfer;
  bool count_last_mile = true;
  bool eager_drop = true;
  // An invalid action ends the agent's turn for the current step.
  bool invalid_blocks_step = true;
  // Idle means waiting for the next step: it also ends the agent's turn.
  bool idle_ends_step = true;
  DcSelection dc_selection = DcSelection::RoundRobin;
  int max_steps = 100000;
  RewardConfig rewards;

  void validate() const;  // throws ConfigError
};

// Speed of light in fiber taken as 3e8 m/s: 300 km per ms.
inline double propagation_delay_ms(double distance_km) { return distance_km / 300.0; }

struct HandoffRecord {
  int request = 0;
  int from_cluster = 0;
  int to_cluster = 0;
  double at = 0.0;
};

struct AgentStats {
  std::vector<int> accepted = std::vector<int>(kSfcKinds, 0);
  std::vector<int> dropped = std::vector<int>(kSfcKinds, 0);
  long actions = 0;
  long invalid = 0;
  long idle = 0;
  long allocations = 0;
  long installs = 0;
  long uninstalls = 0;
  long needed_uninstalls = 0;
  long assists = 0;
  int accept_rewards = 0;  // number of +accept rewards credited
  int drop_rewards = 0;    // number of drop penalties credited
  double reward_total = 0.0;
};

// Everything an episode mutates. Local agents only touch the DCs and
// intra-cluster links of their own cluster; the general agent owns the rest.
struct World {
  NetworkGraph graph;
  ClusterPartition partition;
  Catalog catalog;
  NfvState state;
  std::vector<SfcRequest> requests;
  std::vector<std::vector<int>> queues;  // cluster -> non-terminal request ids it holds
  std::vector<char> bandwidth_released;
  SimOptions options;
  double now = 0.0;
  PathCounters counters;
  std::vector<HandoffRecord> handoffs;
  std::vector<AgentStats> stats;  // per cluster

  World(NetworkGraph g, ClusterPartition p, Catalog c, std::vector<SfcRequest> reqs,
        SimOptions opts);

  bool all_terminal() const;
  // Lower bound on the E2E delay of an unfinished request as seen at t.
  double lower_bound_at(const SfcRequest& r, double t) const;
  // Non-terminal requests.
  int remaining_requests() const;
  // Whether some DC of the cluster has or can install the VNF type.
  bool cluster_can_host(int cluster, int vnf) const;
};

struct ActionOutcome {
  int action = 0;
  double reward = 0.0;
  int status = 0;  // -1 when an assist was queued for the general agent
  bool accepted_sfc = false;
  bool dropped_sfc = false;
  bool invalid = false;
  bool uninstalled_needed = false;
};

struct Assist {
  enum class Kind { Deliver, Transfer };
  Kind kind = Kind::Deliver;
  int agent = 0;
  long sequence = 0;
  int request = 0;
  int transition = -1;  // index of the agent transition to credit, -1 for none
};

// Descending priority 1 - slack / D with slack = D - elapsed(t) - remaining
// processing; ties by earlier arrival, then lower id.
std::vector<int> priority_rank(const World& world, std::vector<int> candidates, double t);
double priority_points(const World& world, const SfcRequest& r, double t);

struct PolicyRef {
  const QNetwork* net = nullptr;  // null: uniform random actions, unless `rule` is set
  double epsilon = 0.0;
  bool rule = false;  // use rule_action instead of a network
};

// Hand-written reference policy: place the next VNF of the most urgent ready
// request that fits at `dc`, else free an idle instance nobody waits for, else idle.
int rule_action(const World& world, int cluster, int dc, double t);

class LocalAgent {
 public:
  LocalAgent(int cluster, PolicyRef policy, Rng rng, bool record);

  int cluster() const { return cluster_; }
  // Runs this agent's share of phase 1 for the step starting at world.now.
  void run_phase(World& world);
  ActionOutcome local_step(World& world, double t);

  std::vector<Assist>& assists() { return assists_; }
  std::vector<Transition>& transitions() { return transitions_; }
  // Adds a reward to a recorded transition (-1: the latest one), or carries
  // it into the next transition when none exists yet.
  void credit(int transition, double reward);
  // Splits a reward evenly over the unproductive transitions (idle, invalid
  // or uninstall) recorded so far, or over all of them if there are none;
  // used for requests that expire while queued.
  void spread(double reward);
  void close_episode();

 private:
  int select_dc(const World& world, double t);
  void scope_scan(World& world, double t);
  ActionOutcome place(World& world, int dc, int vnf, double t, int transition);
  ActionOutcome uninstall(World& world, int dc, int vnf, double t);
  void queue_assist(Assist::Kind kind, int request, int transition);

  int cluster_;
  PolicyRef policy_;
  Rng rng_;
  bool record_;
  int cursor_ = 0;
  long sequence_ = 0;
  double carried_reward_ = 0.0;
  std::vector<std::size_t> unproductive_;  // transition indices
  struct Spread {
    double reward;
    std::size_t count;  // prefix of unproductive_ (or of transitions_ if `all`)
    bool all;
  };
  std::vector<Spread> spread_;
  std::vector<Assist> assists_;
  std::vector<Transition> transitions_;
};

class GeneralAgent {
 public:
  // Handles the queued assists in FIFO order by (agent id, sequence).
  void run_phase(World& world, std::vector<LocalAgent>& agents, double t);

 private:
  void deliver(World& world, LocalAgent& agent, const Assist& a, double t);
  void transfer(World& world, LocalAgent& agent, const Assist& a, double t);
};

// Terminal bookkeeping shared by agents and the clock phase; the single place
// where accept and drop rewards are counted. Both return the reward to credit.
double finalize_accept(World& world, SfcRequest& r);
double finalize_drop(World& world, SfcRequest& r, DropReason reason, double lower_bound);
// Judges C5 once the request's last hop is in the ledger; returns the reward.
double judge(World& world, SfcRequest& r);

// Collected system information: per-cluster accepted/dropped per type and
// substrate utilization.
struct SystemSnapshot {
  std::vector<AgentStats> agents;
  int installed_instances = 0;
  double vcpu_utilization = 0.0;
  double bandwidth_utilization = 0.0;
  PathCounters counters;
};
SystemSnapshot collect(const World& world);

}  // namespace sfcsim
