#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sfcsim/train.hpp"

namespace sfcsim {

struct SweepConfig {
  std::vector<int> dc_counts{20};
  std::vector<int> cluster_limits{4};
  std::vector<double> scales{1.0};
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
};

// Everything a command needs. Unknown keys are rejected when parsing; the
// resolved form written next to every output reruns the same experiment.
struct RunConfig {
  std::uint64_t seed = 1;
  TopologyConfig topology;
  int cluster_limit = 4;
  ClusteringOptions clustering;
  Catalog catalog = default_catalog();
  double scale = 1.0;
  ModelConfig model;
  SimOptions sim;
  std::vector<std::uint64_t> eval_seeds{1, 2, 3, 4, 5};
  int eval_episodes = 3;
  TrainConfig train;
  SweepConfig sweep;
  OutputConfig output;

  void validate() const;  // throws ConfigError
};

// Throws ConfigError on malformed JSON, unknown keys, wrong types or values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
// Every field written out, catalog included.
std::string resolved_config(const RunConfig& config);

}  // namespace sfcsim
