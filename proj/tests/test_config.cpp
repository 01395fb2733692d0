#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sfcsim/config.hpp"
#include "sfcsim/error.hpp"
#include "sfcsim/report.hpp"

using namespace sfcsim;
namespace fs = std::filesystem;

TEST_CASE("an empty object yields the defaults") {
  const auto c = parse_config("{}");
  CHECK(c.topology.dc_count == 20);
  CHECK(c.topology.radius_km == 400.0);
  CHECK(c.cluster_limit == 4);
  CHECK(c.scale == 1.0);
  CHECK(c.model.action_count == 13);
  CHECK(c.train.episodes == 1000);
  CHECK(c.train.update_every == 20);
  CHECK(c.train.updates_per_round == 350);
  CHECK(c.eval_seeds.size() == 5);
  CHECK(c.eval_episodes == 3);
  CHECK(c.sim.actions_per_step == 100);
  CHECK(c.sim.action_cost_ms == 0.01);
  CHECK(c.sim.bw_hold == BandwidthHold::PerTransfer);
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"sede": 1})"), doctest::Contains("unknown key config.sede"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sim": {"bw": "x"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sim": {"rewards": {"bonus": 1}}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"workload": {"vnfs": {"NAT": {"gpu": 1}}}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"workload": {"sfcs": {"XR": {}}}})"), ConfigError);
}

TEST_CASE("types and values are checked") {
  CHECK_THROWS_AS(parse_config(R"({"seed": "one"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"seed": -1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"cluster": {"size_limit": 2.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"cluster": {"size_limit": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sim": {"bw_hold": "sometimes"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sim": {"actions_per_step": 500}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"workload": {"scale": 0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"output": {"formats": ["xml"]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config("[]"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("overrides land in the right fields") {
  const auto c = parse_config(R"({
    "seed": 42,
    "topology": {"dc_count": 40, "vcpu": 80, "link_bandwidth_kbps": 10000000},
    "cluster": {"size_limit": 10},
    "workload": {"scale": 2.0,
                 "vnfs": {"NAT": {"proc_ms": 0.5}},
                 "sfcs": {"MIoT": {"bandwidth_kbps": [2000, 3000], "bundle": [1, 2]}}},
    "drl": {"hidden": [16], "gamma": 0.5},
    "sim": {"bw_hold": "whole_lifetime", "count_last_mile": false, "seeds": [9, 8], "episodes": 2},
    "train": {"episodes": 30, "dc_choices": [2]},
    "sweep": {"dc_counts": [40, 60], "cluster_limits": [1, 10], "scales": [1.5]},
    "output": {"directory": "results", "formats": ["csv"]}
  })");
  CHECK(c.seed == 42);
  CHECK(c.topology.dc_count == 40);
  CHECK(c.topology.vcpu == 80);
  CHECK(c.topology.link_bandwidth_kbps == 10'000'000);
  CHECK(c.cluster_limit == 10);
  CHECK(c.scale == 2.0);
  CHECK(c.catalog.vnfs[0].proc_ms == 0.5);
  const auto& miot = c.catalog.sfcs[static_cast<int>(SfcKind::Miot)];
  CHECK(miot.bw_min_kbps == 2000);
  CHECK(miot.bundle_max == 2);
  CHECK(c.model.hidden == std::vector<int>{16});
  CHECK(c.model.gamma == 0.5);
  CHECK(c.sim.bw_hold == BandwidthHold::WholeLifetime);
  CHECK_FALSE(c.sim.count_last_mile);
  CHECK(c.eval_seeds == std::vector<std::uint64_t>{9, 8});
  CHECK(c.eval_episodes == 2);
  CHECK(c.train.episodes == 30);
  CHECK(c.sweep.dc_counts == std::vector<int>{40, 60});
  CHECK(c.output.directory == "results");
  CHECK(c.output.csv);
  CHECK_FALSE(c.output.json);
}

TEST_CASE("explicit topologies parse") {
  const auto c = parse_config(R"({"topology": {
    "dcs": [{"id": 0, "x_km": 0, "y_km": 0}, {"id": 1, "x_km": 300, "y_km": 0, "vcpu": 12}],
    "links": [{"a": 0, "b": 1, "bandwidth_kbps": 1000000}]}})");
  REQUIRE(c.topology.dcs.size() == 2);
  CHECK(c.topology.dcs[1].vcpu == 12);
  CHECK(c.topology.dcs[0].vcpu == 40);
  const auto g = build_network(c.topology);
  CHECK(g.link(0).distance_km == 300.0);
}

TEST_CASE("the resolved config reproduces the same run config") {
  const auto c = parse_config(R"({"seed": 3, "cluster": {"size_limit": 5},
                                  "sim": {"eager_drop": false, "dc_selection": "most_pending"},
                                  "workload": {"sfcs": {"AR": {"tolerance_ms": 12.5}}}})");
  const auto text = resolved_config(c);
  const auto back = parse_config(text);
  CHECK(resolved_config(back) == text);
  CHECK(back.seed == 3);
  CHECK(back.cluster_limit == 5);
  CHECK_FALSE(back.sim.eager_drop);
  CHECK(back.sim.dc_selection == DcSelection::MostPending);
  CHECK(back.catalog.sfcs[static_cast<int>(SfcKind::Ar)].tolerance_ms == 12.5);
  CHECK(resolved_config(parse_config("{}")) == resolved_config(RunConfig{}));
}

TEST_CASE("number formatting is fixed") {
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(1.0 / 3.0) == "0.333333");
  CHECK(format_number(-0.0000001) == "0");
  CHECK(format_number(-1.25) == "-1.25");
}

TEST_CASE("report csv rows") {
  const auto catalog = default_catalog();
  CellResult cell;
  cell.spec = {20, 4, 1.0, 7, 1};
  cell.scenario_id = "dc20-lim4-x1";
  cell.totals.dc_count = 20;
  cell.totals.cluster_limit = 4;
  cell.totals.cluster_count = 5;
  cell.totals.per_type.assign(6, {});
  cell.totals.per_type[0] = {10, 4, 6, 8.0};
  cell.totals.per_type[4] = {3, 3, 0, 3.0};
  const auto csv = report_csv({cell}, catalog);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "scenario_id,seed,dc_count,cluster_limit,cluster_count,scale,sfc_type,generated,"
                "accepted,dropped,acc_ratio,mean_e2e_ms");
  std::getline(in, line);
  CHECK(line == "dc20-lim4-x1,7,20,4,5,1,CG,10,4,6,0.4,2");
  std::getline(in, line);
  CHECK(line == "dc20-lim4-x1,7,20,4,5,1,AR,0,0,0,,");
  for (int i = 0; i < 5; ++i) std::getline(in, line);
  CHECK(line == "dc20-lim4-x1,7,20,4,5,1,ALL,13,7,6,0.538462,1.571429");
  CHECK_FALSE(std::getline(in, line));

  const auto j = nlohmann::json::parse(report_json({cell}, catalog));
  CHECK(j["cells"][0]["totals"]["per_type"]["CG"]["accepted"] == 4);
  CHECK(j["cells"][0]["totals"]["per_type"]["AR"]["acc_ratio"].is_null());
}

TEST_CASE("atomic writes create directories and leave no temp file") {
  const auto dir = fs::temp_directory_path() / "sfcsim_unit" / "nested" / "deeper";
  fs::remove_all(dir);
  const auto path = dir / "out.txt";
  write_file_atomic(path, "hello\n");
  std::ifstream in(path);
  std::string s;
  std::getline(in, s);
  CHECK(s == "hello");
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
  CHECK_THROWS_AS(write_file_atomic("/proc/definitely/not/writable.txt", "x"), IoError);
}
