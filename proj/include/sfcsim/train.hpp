#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sfcsim/qnetwork.hpp"
#include "sfcsim/sim.hpp"

namespace sfcsim {

struct TrainConfig {
  int episodes = 1000;
  int update_every = 20;
  int updates_per_round = 350;
  std::vector<int> dc_choices{2, 3, 4};
  double scale_min = 0.1;
  double scale_max = 0.5;
  double area_km = 1000.0;
  // Greedy validation after each update round picks the kept weights.
  int validation_episodes = 3;
  double validation_scale = 0.3;

  void validate() const;  // throws ConfigError
};

struct CurveRow {
  int episode = 0;
  double mean_reward = 0.0;  // per action
  std::optional<double> loss;  // mean over the update round that followed the episode
  double epsilon = 0.0;
  std::optional<double> acceptance_ratio;
};

struct TrainInputs {
  TopologyConfig topology;  // capacities; dc_count and area come from TrainConfig
  Catalog catalog;
  ModelConfig model;
  SimOptions sim;
  TrainConfig train;
  std::uint64_t seed = 1;
};

struct TrainResult {
  QNetwork best;
  QNetwork last;
  std::vector<CurveRow> curve;
  double best_validation = -1.0;
  int best_round = -1;
  long updates = 0;
};

using ProgressFn = std::function<void(const CurveRow&)>;
TrainResult train(const TrainInputs& inputs, const ProgressFn& progress = {});

// One sweep cell: all episodes for one (dc_count, cluster_limit, scale, seed).
struct CellSpec {
  int dc_count = 20;
  int cluster_limit = 4;
  double scale = 1.0;
  std::uint64_t seed = 1;
  int episodes = 1;
};

struct CellResult {
  CellSpec spec;
  std::string scenario_id;
  EpisodeReport totals;  // counts summed over the cell's episodes
  std::vector<EpisodeReport> episodes;
};

struct EvalInputs {
  TopologyConfig topology;
  Catalog catalog;
  SimOptions sim;
  ClusteringOptions clustering;
};

// `policy.net == nullptr` evaluates the uniform random policy.
CellResult evaluate_cell(const EvalInputs& inputs, const CellSpec& cell, PolicyRef policy);
// Cells run on up to `jobs` threads; results keep the input order.
std::vector<CellResult> evaluate_sweep(const EvalInputs& inputs, const std::vector<CellSpec>& cells,
                                       PolicyRef policy, int jobs);

std::string scenario_id(const CellSpec& cell);
EpisodeReport merge_reports(const std::vector<EpisodeReport>& reports);

}  // namespace sfcsim
