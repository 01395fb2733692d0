#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sfcsim/config.hpp"
#include "sfcsim/error.hpp"
#include "sfcsim/report.hpp"

using namespace sfcsim;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
};

struct Loaded {
  RunConfig config;
  fs::path out;
};

Loaded load(const Common& common) {
  Loaded l{load_config(common.config), {}};
  if (common.seed) {
    l.config.seed = *common.seed;
    l.config.eval_seeds = {*common.seed};
  }
  if (!common.out.empty()) l.config.output.directory = common.out;
  l.out = l.config.output.directory;
  return l;
}

void write_outputs(const Loaded& l, const std::vector<CellResult>& cells) {
  const auto& c = l.config;
  if (c.output.csv) {
    write_file_atomic(l.out / "report.csv", report_csv(cells, c.catalog));
    write_file_atomic(l.out / "handoffs.csv", handoff_csv(cells));
  }
  if (c.output.json) write_file_atomic(l.out / "report.json", report_json(cells, c.catalog));
  write_file_atomic(l.out / "config.resolved.json", resolved_config(c));
}

void print_summary(const std::vector<CellResult>& cells) {
  std::printf("%-22s %6s %8s %9s %8s %8s\n", "scenario", "seed", "clusters", "generated", "accepted",
              "A_r");
  for (const auto& cell : cells) {
    const auto& t = cell.totals;
    const auto ar = t.acceptance_ratio();
    std::printf("%-22s %6llu %8d %9ld %8ld %8s\n", cell.scenario_id.c_str(),
                static_cast<unsigned long long>(cell.spec.seed), t.cluster_count, t.generated,
                t.accepted, ar ? format_number(*ar).c_str() : "-");
  }
}

EvalInputs eval_inputs(const RunConfig& c) {
  return EvalInputs{c.topology, c.catalog, c.sim, c.clustering};
}

struct PolicyChoice {
  std::string weights;
  bool random = false;
  bool rule = false;
};

// Keeps the loaded network alive for the PolicyRef.
struct PolicyHolder {
  std::optional<QNetwork> net;
  PolicyRef ref;
};

PolicyHolder make_policy(const PolicyChoice& choice, const RunConfig& c) {
  PolicyHolder h;
  if (choice.random + choice.rule + !choice.weights.empty() != 1)
    throw ConfigError("choose exactly one of --weights, --random-policy, --rule-policy");
  if (choice.rule) {
    h.ref.rule = true;
  } else if (!choice.weights.empty()) {
    h.net.emplace(QNetwork::load(choice.weights, c.model));
  }
  return h;
}

int cmd_train(const Common& common) {
  const auto l = load(common);
  const auto& c = l.config;
  TrainInputs in{c.topology, c.catalog, c.model, c.sim, c.train, c.seed};
  const auto result = train(in, [](const CurveRow& row) {
    if (!row.loss) return;
    std::fprintf(stderr, "episode %d  loss %s  epsilon %s  acc %s\n", row.episode,
                 format_number(*row.loss).c_str(), format_number(row.epsilon).c_str(),
                 row.acceptance_ratio ? format_number(*row.acceptance_ratio).c_str() : "-");
  });
  fs::create_directories(l.out);
  result.best.save(l.out / "weights.bin");
  result.last.save(l.out / "weights_last.bin");
  write_file_atomic(l.out / "training_curve.csv", curve_csv(result.curve));
  json summary = {{"episodes", c.train.episodes},
                  {"updates", result.updates},
                  {"best_round", result.best_round},
                  {"best_validation_acc", result.best_validation}};
  write_file_atomic(l.out / "train_summary.json", summary.dump(2) + "\n");
  write_file_atomic(l.out / "config.resolved.json", resolved_config(c));
  std::printf("trained %d episodes, %ld updates; kept round %d (validation A_r %s)\n",
              c.train.episodes, result.updates, result.best_round,
              format_number(result.best_validation).c_str());
  return 0;
}

void export_workloads(const Loaded& l, const std::vector<CellSpec>& cells) {
  const auto& c = l.config;
  for (const auto& cell : cells) {
    auto topo = c.topology;
    if (topo.dcs.empty()) topo.dc_count = cell.dc_count;
    for (int e = 0; e < cell.episodes; ++e) {
      const auto s = make_scenario(topo, cell.cluster_limit, cell.scale, c.catalog,
                                   mix_seed(cell.seed, static_cast<std::uint64_t>(e)), c.clustering);
      std::ostringstream text;
      write_workload(text, c.catalog, s.requests);
      write_file_atomic(l.out / "workloads" /
                            (scenario_id(cell) + "-seed" + std::to_string(cell.seed) + "-ep" +
                             std::to_string(e) + ".jsonl"),
                        text.str());
    }
  }
}

int run_cells(const Common& common, const PolicyChoice& choice, bool export_loads, bool sweep) {
  const auto l = load(common);
  const auto& c = l.config;
  std::vector<CellSpec> cells;
  const int dc_default = c.topology.dcs.empty() ? c.topology.dc_count
                                                : static_cast<int>(c.topology.dcs.size());
  const std::vector<int> dcs = sweep ? c.sweep.dc_counts : std::vector<int>{dc_default};
  const std::vector<int> limits = sweep ? c.sweep.cluster_limits : std::vector<int>{c.cluster_limit};
  const std::vector<double> scales = sweep ? c.sweep.scales : std::vector<double>{c.scale};
  for (int n : dcs)
    for (int lim : limits)
      for (double x : scales)
        for (auto seed : c.eval_seeds) cells.push_back({n, lim, x, seed, c.eval_episodes});
  const auto policy = make_policy(choice, c);
  PolicyRef ref = policy.ref;
  if (policy.net) ref.net = &*policy.net;
  const auto results = evaluate_sweep(eval_inputs(c), cells, ref, common.jobs);
  write_outputs(l, results);
  if (export_loads) export_workloads(l, cells);
  print_summary(results);
  return 0;
}

int cmd_clusters(const Common& common) {
  const auto l = load(common);
  const auto& c = l.config;
  const auto s = make_scenario(c.topology, c.cluster_limit, c.scale, c.catalog, c.seed, c.clustering);
  const auto& p = s.partition;
  json clusters = json::array();
  std::printf("%d DCs, size limit %d -> %d clusters (%d iterations)\n", s.graph.dc_count(),
              c.cluster_limit, p.cluster_count(), p.iterations);
  for (int k = 0; k < p.cluster_count(); ++k) {
    int inter = 0;
    for (int link : p.inter_links) {
      const auto& e = s.graph.link(link);
      if (p.cluster_of(e.a) == k || p.cluster_of(e.b) == k) ++inter;
    }
    std::string members;
    for (int d : p.clusters[k]) members += (members.empty() ? "" : " ") + std::to_string(d);
    std::printf("cluster %d: dcs [%s] intra %zu inter %d\n", k, members.c_str(),
                p.intra_links[k].size(), inter);
    clusters.push_back({{"id", k},
                        {"dcs", p.clusters[k]},
                        {"centroid", {p.centroids[k].x_km, p.centroids[k].y_km}},
                        {"intra_links", p.intra_links[k].size()},
                        {"inter_links", inter},
                        {"neighbors", p.adjacency[k]}});
  }
  json dcs = json::array();
  for (const auto& d : s.graph.dcs())
    dcs.push_back({{"id", d.id}, {"x_km", d.position.x_km}, {"y_km", d.position.y_km},
                   {"cluster", p.cluster_of(d.id)}});
  json links = json::array();
  for (const auto& e : s.graph.links())
    links.push_back({{"id", e.id}, {"a", e.a}, {"b", e.b}, {"bandwidth_kbps", e.bandwidth_kbps},
                     {"distance_km", e.distance_km}, {"inter", p.is_inter(e)}});
  json root = {{"seed", c.seed},
               {"dc_count", s.graph.dc_count()},
               {"size_limit", c.cluster_limit},
               {"cluster_count", p.cluster_count()},
               {"iterations", p.iterations},
               {"clusters", std::move(clusters)},
               {"dcs", std::move(dcs)},
               {"links", std::move(links)}};
  write_file_atomic(l.out / "clusters.json", root.dump(2) + "\n");
  return 0;
}

int cmd_replay(const Common& common, const PolicyChoice& choice, const std::string& workload) {
  const auto l = load(common);
  const auto& c = l.config;
  auto s = make_scenario(c.topology, c.cluster_limit, c.scale, c.catalog, c.seed, c.clustering);
  std::ifstream in(workload);
  if (!in) throw ConfigError("cannot read workload " + workload);
  s.requests = read_workload(in, c.catalog, s.graph.dc_count());
  const auto policy = make_policy(choice, c);
  PolicyRef ref = policy.ref;
  if (policy.net) ref.net = &*policy.net;
  const int dc_count = s.graph.dc_count();
  Episode ep(std::move(s), c.sim, ref, false);
  CellResult cell;
  cell.spec = {dc_count, c.cluster_limit, c.scale, c.seed, 1};
  cell.scenario_id = "replay-" + fs::path(workload).stem().string();
  cell.episodes.push_back(ep.run());
  cell.episodes.back().cluster_limit = c.cluster_limit;
  cell.totals = merge_reports(cell.episodes);
  write_outputs(l, {cell});
  print_summary({cell});
  return 0;
}

void add_common(CLI::App* sub, Common& common, bool with_jobs) {
  sub->add_option("-c,--config", common.config, "JSON run configuration")->required();
  sub->add_option("--seed", common.seed, "Seed overriding the config (env SFCSIM_SEED)")
      ->envname("SFCSIM_SEED");
  sub->add_option("-o,--out", common.out, "Output directory (env SFCSIM_OUT)")->envname("SFCSIM_OUT");
  if (with_jobs)
    sub->add_option("-j,--jobs", common.jobs, "Worker threads for sweep cells (env SFCSIM_JOBS)")
        ->envname("SFCSIM_JOBS")
        ->check(CLI::PositiveNumber);
}

void add_policy(CLI::App* sub, PolicyChoice& choice) {
  sub->add_option("-w,--weights", choice.weights, "Trained weight file");
  sub->add_flag("--random-policy", choice.random, "Uniform random actions");
  sub->add_flag("--rule-policy", choice.rule, "Hand-written reference policy");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed SFC provisioning simulator"};
  app.require_subcommand(1);

  Common common;
  PolicyChoice choice;
  bool export_loads = false;
  std::string workload;

  auto* train_cmd = app.add_subcommand("train", "Train the local-agent DQN on the small-network curriculum");
  add_common(train_cmd, common, false);
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate one scenario over the configured seeds");
  add_common(eval_cmd, common, true);
  add_policy(eval_cmd, choice);
  eval_cmd->add_flag("--export-workloads", export_loads, "Also write each episode's requests as JSON lines");
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate the sweep grid");
  add_common(sweep_cmd, common, true);
  add_policy(sweep_cmd, choice);
  auto* clusters_cmd = app.add_subcommand("clusters", "Print and export the DC partition");
  add_common(clusters_cmd, common, false);
  auto* replay_cmd = app.add_subcommand("replay", "Run one episode on a recorded workload");
  add_common(replay_cmd, common, false);
  add_policy(replay_cmd, choice);
  replay_cmd->add_option("--workload", workload, "JSON-lines workload file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(common);
    if (eval_cmd->parsed()) return run_cells(common, choice, export_loads, false);
    if (sweep_cmd->parsed()) return run_cells(common, choice, false, true);
    if (clusters_cmd->parsed()) return cmd_clusters(common);
    if (replay_cmd->parsed()) return cmd_replay(common, choice, workload);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "sfcsim: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "sfcsim: %s\n", e.what());
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "sfcsim: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "sfcsim: %s\n", e.what());
    return 1;
  }
  return 2;
}
