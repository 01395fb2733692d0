#include "sfcsim/train.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "sfcsim/error.hpp"

namespace sfcsim {

namespace {

enum Stream : std::uint64_t {
  kCurriculum = 101,
  kLearner = 102,
  kReplay = 103,
  kEpisodeBase = 1000,
  kValidationBase = 500000,
};

Scenario training_scenario(const TrainInputs& in, int dc_count, double scale, std::uint64_t seed) {
  auto topo = in.topology;
  topo.dc_count = dc_count;
  topo.area_km = in.train.area_km;
  topo.dcs.clear();
  topo.links.clear();
  return make_scenario(topo, dc_count, scale, in.catalog, seed);
}

}  // namespace

void TrainConfig::validate() const {
  if (episodes <= 0) throw ConfigError("train.episodes must be positive");
  if (update_every <= 0) throw ConfigError("train.update_every must be positive");
  if (updates_per_round < 0) throw ConfigError("train.updates_per_round must be non-negative");
  if (dc_choices.empty()) throw ConfigError("train.dc_choices must not be empty");
  for (int n : dc_choices)
    if (n < 2) throw ConfigError("train.dc_choices entries must be at least 2");
  if (!(scale_min > 0.0) || scale_max < scale_min)
    throw ConfigError("train: need 0 < scale_min <= scale_max");
  if (!(area_km > 0.0)) throw ConfigError("train.area_km must be positive");
  if (validation_episodes < 0) throw ConfigError("train.validation_episodes must be non-negative");
  if (!(validation_scale > 0.0)) throw ConfigError("train.validation_scale must be positive");
}

TrainResult train(const TrainInputs& in, const ProgressFn& progress) {
  in.model.validate();
  in.sim.validate();
  in.train.validate();
  const auto& tc = in.train;
  const auto& mc = in.model;

  DqnLearner learner(mc, mix_seed(in.seed, kLearner));
  ReplayMemory memory(static_cast<std::size_t>(mc.replay_capacity));
  Rng curriculum(mix_seed(in.seed, kCurriculum));
  Rng replay_rng(mix_seed(in.seed, kReplay));

  std::vector<Scenario> validation;
  for (int k = 0; k < tc.validation_episodes; ++k)
    validation.push_back(training_scenario(in, tc.dc_choices[k % tc.dc_choices.size()],
                                           tc.validation_scale,
                                           mix_seed(in.seed, kValidationBase + k)));
  auto validate_policy = [&](const QNetwork& net) {
    long accepted = 0;
    long generated = 0;
    for (const auto& s : validation) {
      Episode ep(s, in.sim, PolicyRef{&net, 0.0}, false);
      const auto rep = ep.run();
      accepted += rep.accepted;
      generated += rep.generated;
    }
    return generated ? static_cast<double>(accepted) / generated : 0.0;
  };

  TrainResult result{learner.online(), learner.online(), {}, -1.0, -1, 0};
  double epsilon = mc.epsilon_start;
  int round = 0;
  for (int e = 0; e < tc.episodes; ++e) {
    const int dc_count =
        tc.dc_choices[curriculum.uniform_int(0, static_cast<std::int64_t>(tc.dc_choices.size()) - 1)];
    const double scale = curriculum.uniform(tc.scale_min, tc.scale_max);
    Episode ep(training_scenario(in, dc_count, scale, mix_seed(in.seed, kEpisodeBase + e)), in.sim,
               PolicyRef{&learner.online(), epsilon}, true);
    const auto rep = ep.run();
    auto transitions = ep.take_transitions();
    double reward = 0.0;
    for (const auto& t : transitions) reward += t.reward;

    CurveRow row;
    row.episode = e + 1;
    row.mean_reward = transitions.empty() ? 0.0 : reward / static_cast<double>(transitions.size());
    row.epsilon = epsilon;
    row.acceptance_ratio = rep.acceptance_ratio();
    for (auto& t : transitions) memory.push(std::move(t));

    if ((e + 1) % tc.update_every == 0) {
      double loss_sum = 0.0;
      int loss_count = 0;
      for (int u = 0; u < tc.updates_per_round; ++u) {
        if (const auto loss = learner.update(memory, replay_rng)) {
          loss_sum += *loss;
          ++loss_count;
        }
      }
      if (loss_count > 0) row.loss = loss_sum / loss_count;
      const double score = tc.validation_episodes > 0 ? validate_policy(learner.online()) : 0.0;
      if (score > result.best_validation) {
        result.best_validation = score;
        result.best = learner.online();
        result.best_round = round;
      }
      ++round;
    }
    result.curve.push_back(row);
    if (progress) progress(row);
    epsilon = std::max(mc.epsilon_end, epsilon * mc.epsilon_decay);
  }
  if (result.best_round < 0) result.best = learner.online();
  result.last = learner.online();
  result.updates = learner.updates();
  return result;
}

std::string scenario_id(const CellSpec& cell) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "dc%d-lim%d-x%g", cell.dc_count, cell.cluster_limit, cell.scale);
  return buf;
}

EpisodeReport merge_reports(const std::vector<EpisodeReport>& reports) {
  EpisodeReport total;
  if (reports.empty()) return total;
  total = reports.front();
  total.handoff_log.clear();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto& r = reports[i];
    total.cluster_count = std::max(total.cluster_count, r.cluster_count);
    if (total.per_cluster.size() < r.per_cluster.size())
      total.per_cluster.resize(r.per_cluster.size(), std::vector<TypeCounts>(total.per_type.size()));
    for (std::size_t c = 0; c < r.per_cluster.size(); ++c)
      for (std::size_t s = 0; s < r.per_type.size(); ++s) total.per_cluster[c][s].merge(r.per_cluster[c][s]);
    for (std::size_t s = 0; s < r.per_type.size(); ++s) total.per_type[s].merge(r.per_type[s]);
    total.generated += r.generated;
    total.accepted += r.accepted;
    total.dropped += r.dropped;
    for (std::size_t k = 0; k < total.drop_reasons.size(); ++k) total.drop_reasons[k] += r.drop_reasons[k];
    total.steps += r.steps;
    total.reward_total += r.reward_total;
    total.accept_rewards += r.accept_rewards;
    total.drop_rewards += r.drop_rewards;
    total.actions += r.actions;
    total.invalid_actions += r.invalid_actions;
    total.handoffs += r.handoffs;
    total.dijkstra_calls += r.dijkstra_calls;
    total.max_settled = std::max(total.max_settled, r.max_settled);
    total.dfs_edges_visited += r.dfs_edges_visited;
  }
  return total;
}

CellResult evaluate_cell(const EvalInputs& in, const CellSpec& cell, PolicyRef policy) {
  if (cell.dc_count < 2) throw ConfigError("sweep dc_count must be at least 2");
  if (cell.cluster_limit < 1) throw ConfigError("sweep cluster_limit must be at least 1");
  if (!(cell.scale > 0.0)) throw ConfigError("sweep scale must be positive");
  if (cell.episodes < 1) throw ConfigError("episodes per cell must be at least 1");
  CellResult out;
  out.spec = cell;
  out.scenario_id = scenario_id(cell);
  auto topo = in.topology;
  if (topo.dcs.empty()) topo.dc_count = cell.dc_count;
  for (int e = 0; e < cell.episodes; ++e) {
    auto scenario = make_scenario(topo, cell.cluster_limit, cell.scale, in.catalog,
                                  mix_seed(cell.seed, static_cast<std::uint64_t>(e)), in.clustering);
    Episode ep(std::move(scenario), in.sim, policy, false);
    auto rep = ep.run();
    rep.cluster_limit = cell.cluster_limit;
    out.episodes.push_back(std::move(rep));
  }
  out.totals = merge_reports(out.episodes);
  out.totals.seed = cell.seed;
  return out;
}

std::vector<CellResult> evaluate_sweep(const EvalInputs& in, const std::vector<CellSpec>& cells,
                                       PolicyRef policy, int jobs) {
  std::vector<CellResult> results(cells.size());
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) results[i] = evaluate_cell(in, cells[i], policy);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) {
        try {
          results[i] = evaluate_cell(in, cells[i], policy);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace sfcsim
