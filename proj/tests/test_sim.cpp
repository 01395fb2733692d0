#include <doctest.h>

#include <numeric>

#include "helpers.hpp"
#include "oracles.hpp"
#include "sfcsim/report.hpp"
#include "sfcsim/sim.hpp"
#include "sfcsim/train.hpp"

using namespace sfcsim;

namespace {

Scenario scenario_of(NetworkGraph g, const std::vector<int>& assignment, std::vector<SfcRequest> reqs) {
  Scenario s;
  s.partition = fixture::partition_of(g, assignment);
  s.graph = std::move(g);
  s.catalog = default_catalog();
  s.requests = std::move(reqs);
  s.seed = 1;
  s.scale = 1.0;
  return s;
}

const PolicyRef kRule{nullptr, 0.0, true};

std::string csv_of(const EpisodeReport& rep, const Catalog& catalog) {
  CellResult cell;
  cell.scenario_id = "x";
  cell.totals = rep;
  cell.episodes = {rep};
  return report_csv({cell}, catalog) + report_json({cell}, catalog);
}

}  // namespace

TEST_CASE("an empty world only advances the clock") {
  Episode ep(scenario_of(fixture::line(2), {0, 0}, {}), {}, kRule, false);
  CHECK(ep.done());
  ep.run_step();
  CHECK(ep.world().now == 1.0);
  CHECK(ep.world().stats[0].actions == 0);
  const auto rep = ep.run();
  CHECK(rep.empty_workload());
  CHECK_FALSE(rep.acceptance_ratio());
  CHECK(rep.generated == 0);
}

TEST_CASE("Ind4.0 on pre-installed NAT and FW") {
  auto r = fixture::request(0, SfcKind::Ind40, 0, 0);
  Episode ep(scenario_of(fixture::line(1), {0}, {r}), {}, kRule, false);
  auto& st = ep.world().state;
  st.place_vnf(0, static_cast<int>(VnfKind::Nat), 0);
  st.place_vnf(0, static_cast<int>(VnfKind::Fw), 0);
  const auto rep = ep.run();
  const auto& done = ep.world().requests[0];
  REQUIRE(done.status == RequestStatus::Accepted);
  CHECK(rep.accepted == 1);
  double waiting = 0.0, processing = 0.0;
  for (const auto& h : done.ledger.hops) {
    waiting += h.wait_ms;
    processing += h.processing_ms;
  }
  CHECK(processing == doctest::Approx(0.09));
  CHECK(done.ledger.propagation_total == 0.0);
  CHECK(done.ledger.accrued() == doctest::Approx(0.09 + waiting));
  CHECK(st.instance_count(0, static_cast<int>(VnfKind::Nat)) == 1);
  CHECK(st.instance_count(0, static_cast<int>(VnfKind::Fw)) == 1);
}

TEST_CASE("expired requests are dropped in the clock phase") {
  SimOptions opts;
  opts.eager_drop = false;
  const QNetwork idle = [] {
    QNetwork net{ModelConfig{}};
    net.parameters()[net.layers().back().bias + 2 * kVnfKinds] = 1.0;
    return net;
  }();
  Episode ep(scenario_of(fixture::line(2), {0, 0}, {fixture::request(0, SfcKind::Miot, 0, 1, 1000)}),
             opts, {&idle, 0.0}, true);
  for (int i = 0; i < 5; ++i) ep.run_step();
  CHECK_FALSE(ep.done());
  ep.run_step();
  const auto& r = ep.world().requests[0];
  CHECK(r.status == RequestStatus::Dropped);
  CHECK(r.drop_reason == DropReason::Deadline);
  CHECK(ep.world().stats[0].drop_rewards == 1);
  CHECK(ep.world().stats[0].reward_total == doctest::Approx(-1.5));
  const auto ts = ep.take_transitions();
  double total = 0.0;
  for (const auto& t : ts) total += t.reward;
  CHECK(total == doctest::Approx(-1.5));
  CHECK(ts.back().terminal);
}

TEST_CASE("a saturating instance accepts everything") {
  std::vector<DataCenterSpec> dcs{fixture::dc(0), fixture::dc(1)};
  for (auto& d : dcs) {
    d.vcpu = 100000;
    d.ram_gb = 100000;
    d.storage_gb = 100000;
  }
  NetworkGraph g(dcs, {fixture::link(0, 0, 1, 0.0, 100'000'000)});
  Rng rng(3);
  auto reqs = generate_bundles(default_catalog(), 2, 0.2, rng);
  for (auto& r : reqs) r.dest_dc = r.source_dc;
  Episode ep(scenario_of(g, {0, 0}, reqs), {}, kRule, false);
  const auto rep = ep.run();
  CHECK(rep.generated == static_cast<long>(reqs.size()));
  CHECK(*rep.acceptance_ratio() == 1.0);
}

TEST_CASE("episode invariants on random scenarios") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    TopologyConfig cfg;
    cfg.dc_count = static_cast<int>(4 + seed * 2);
    SimOptions opts;
    if (seed % 2) opts.bw_hold = BandwidthHold::WholeLifetime;
    if (seed % 3 == 0) opts.count_last_mile = false;
    const PolicyRef policy = seed % 2 ? kRule : PolicyRef{};
    Episode ep(make_scenario(cfg, 3, 0.4, default_catalog(), seed), opts, policy, false);
    double last = 0.0;
    const auto rep = ep.run([&](const World& w) {
      CHECK(w.now > last);
      last = w.now;
      CHECK(oracle::audit_world(w).empty());
      CHECK(w.state.audit(w.now, true).ok());
    });
    const auto& w = ep.world();
    for (const auto& r : w.requests) {
      CHECK(r.terminal());
      CHECK(r.ledger.accrued() == doctest::Approx(r.ledger.recompute()).epsilon(1e-12));
      CHECK(oracle::check_deadline(w, r).empty());
      for (std::size_t k = 0; k < r.placements.size(); ++k) {
        CHECK(r.placements[k].start >= r.placements[k].decided_at);
        CHECK(r.placements[k].finish > r.placements[k].start);
        if (k > 0) CHECK(r.placements[k].decided_at >= r.placements[k - 1].finish - 1e-12);
      }
    }
    CHECK(rep.generated == rep.accepted + rep.dropped);
    CHECK(rep.accept_rewards == rep.accepted);
    CHECK(rep.drop_rewards == rep.dropped);
    for (int s = 0; s < 6; ++s) {
      long gen = 0;
      for (const auto& row : rep.per_cluster) gen += row[s].generated;
      CHECK(gen == rep.per_type[s].generated);
      CHECK(rep.per_type[s].generated == rep.per_type[s].accepted + rep.per_type[s].dropped);
    }
    const auto snap = collect(w);
    long accepted = 0;
    for (const auto& a : snap.agents) accepted += std::accumulate(a.accepted.begin(), a.accepted.end(), 0L);
    CHECK(accepted == rep.accepted);
  }
}

TEST_CASE("same seed, same report") {
  TopologyConfig cfg;
  cfg.dc_count = 12;
  const auto catalog = default_catalog();
  auto run = [&] {
    Episode ep(make_scenario(cfg, 4, 0.5, catalog, 9), {}, {}, false);
    return csv_of(ep.run(), catalog);
  };
  CHECK(run() == run());
}

TEST_CASE("agent schedule does not change the outcome") {
  TopologyConfig cfg;
  cfg.dc_count = 16;
  const auto catalog = default_catalog();
  const auto net = QNetwork::initialized(ModelConfig{}, 3);
  for (const PolicyRef policy : {PolicyRef{}, kRule, PolicyRef{&net, 0.2}}) {
    Episode a(make_scenario(cfg, 4, 0.5, catalog, 5), {}, policy, false);
    Episode b(make_scenario(cfg, 4, 0.5, catalog, 5), {}, policy, false);
    std::vector<int> order(b.agents().size());
    std::iota(order.rbegin(), order.rend(), 0);
    const auto ra = a.run();
    while (!b.done()) b.run_step(order);
    const auto rb = build_report(b.world(), 4, 5, 0.5, b.steps());
    CHECK(csv_of(ra, catalog) == csv_of(rb, catalog));
  }
}

TEST_CASE("changing the cluster limit keeps network and workload") {
  TopologyConfig cfg;
  cfg.dc_count = 20;
  const auto a = make_scenario(cfg, 4, 1.0, default_catalog(), 3);
  const auto b = make_scenario(cfg, 20, 1.0, default_catalog(), 3);
  CHECK(a.graph.link_count() == b.graph.link_count());
  REQUIRE(a.requests.size() == b.requests.size());
  for (std::size_t i = 0; i < a.requests.size(); ++i) {
    CHECK(a.requests[i].source_dc == b.requests[i].source_dc);
    CHECK(a.requests[i].bandwidth_kbps == b.requests[i].bandwidth_kbps);
  }
  CHECK(a.partition.cluster_count() == 5);
  CHECK(b.partition.cluster_count() == 1);
}

TEST_CASE("sim options are validated") {
  SimOptions o;
  CHECK_NOTHROW(o.validate());
  o.actions_per_step = 200;  // 200 x 0.01 ms exceeds a 1 ms step
  CHECK_THROWS(o.validate());
  o = {};
  o.step_ms = 0.0;
  CHECK_THROWS(o.validate());
}
