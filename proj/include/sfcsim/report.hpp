#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sfcsim/train.hpp"

namespace sfcsim {

// Writes to `path`.tmp and renames over `path`; creates parent directories.
// Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// One row per (cell, SFC type) plus an "ALL" row per cell. Counts are summed
// over the cell's episodes; acc_ratio and mean_e2e_ms are empty when undefined.
std::string report_csv(const std::vector<CellResult>& cells, const Catalog& catalog);
// Full-fidelity report: per-episode, per-cluster and per-type counts, drop
// reasons, rewards and path counters. Serialized with two-space indentation.
std::string report_json(const std::vector<CellResult>& cells, const Catalog& catalog);
// scenario_id, seed, episode, request, from_cluster, to_cluster, at_ms
std::string handoff_csv(const std::vector<CellResult>& cells);
// episode, mean_reward, loss, epsilon, acc_ratio
std::string curve_csv(const std::vector<CurveRow>& rows);

// Fixed-precision decimal used by every CSV so reruns compare byte for byte.
std::string format_number(double value);

}  // namespace sfcsim
