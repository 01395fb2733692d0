#include <doctest.h>

#include <map>

#include "helpers.hpp"
#include "sfcsim/nfv_state.hpp"
#include "sfcsim/rng.hpp"

using namespace sfcsim;

namespace {

int vnf(const Catalog& c, const char* name) { return c.vnf_index(name); }

}  // namespace

TEST_CASE("can_place against an empty default DC") {
  const auto c = default_catalog();
  NfvState st(fixture::line(2), c);
  CHECK(st.can_place(0, vnf(c, "TM")));
}

TEST_CASE("placement arithmetic") {
  const auto c = default_catalog();
  NfvState st(fixture::line(2), c);
  const auto id = st.place_vnf(0, vnf(c, "NAT"));
  REQUIRE(id);
  CHECK(st.dc(0).free == Resources{39, 252, 2041});
  CHECK(st.instance_count(0, vnf(c, "NAT")) == 1);
  CHECK(st.idle_count(0, vnf(c, "NAT"), 0.0) == 1);
  CHECK(st.uninstall_vnf(*id, 0.0, false) == UninstallResult::Removed);
  CHECK(st.dc(0).free == Resources{40, 256, 2048});
  CHECK(st.instance_count(0, vnf(c, "NAT")) == 0);
  CHECK(st.audit(0.0, true).ok());
}

TEST_CASE("placing until vCPU runs out") {
  const auto c = default_catalog();
  NfvState st(fixture::line(2), c);
  const int tm = vnf(c, "TM");  // 13 vCPU: three fit in 40
  CHECK(st.place_vnf(1, tm));
  CHECK(st.place_vnf(1, tm));
  CHECK(st.place_vnf(1, tm));
  CHECK_FALSE(st.can_place(1, tm));
  CHECK_FALSE(st.place_vnf(1, tm));
  CHECK(st.dc(1).free.vcpu == 1);
  CHECK(st.can_place(1, vnf(c, "NAT")));  // exactly 1 vCPU left: boundary inclusive
  CHECK(st.place_vnf(1, vnf(c, "NAT")));
  CHECK(st.dc(1).free.vcpu == 0);
  for (int v = 0; v < 6; ++v) CHECK_FALSE(st.can_place(1, v));
}

TEST_CASE("allocation timing") {
  const auto c = default_catalog();
  NfvState st(fixture::line(2), c);
  const int fw = vnf(c, "FW");
  const auto id = *st.place_vnf(0, fw);

  auto r = fixture::request(0, SfcKind::Ind40, 0, 1);
  r.next_vnf = 1;  // NAT already served
  r.ready_at = 10.0;
  const auto rec = st.allocate(r, 1, id, 10.0);
  CHECK(rec.wait_ms == 0.0);
  CHECK(st.instance(id).busy_until == doctest::Approx(10.03));
  CHECK(st.instance(id).allocated_request == 0);
  CHECK(r.next_vnf == 2);
  CHECK(r.placements.size() == 1);

  auto late = fixture::request(1, SfcKind::Ind40, 0, 1);
  late.next_vnf = 1;
  late.ready_at = 8.0;
  const auto other = *st.place_vnf(0, fw);
  CHECK(st.allocate(late, 1, other, 10.0).wait_ms == doctest::Approx(2.0));
  CHECK(late.ledger.processing_total == doctest::Approx(2.03));
}

TEST_CASE("allocation errors") {
  const auto c = default_catalog();
  NfvState st(fixture::line(2), c);
  const auto nat = *st.place_vnf(0, vnf(c, "NAT"));
  const auto nat2 = *st.place_vnf(0, vnf(c, "NAT"));
  const auto fw = *st.place_vnf(0, vnf(c, "FW"));
  auto r = fixture::request(0, SfcKind::Ind40, 0, 1);
  CHECK_THROWS_AS(st.allocate(r, 0, fw, 0.0), std::logic_error);  // type mismatch
  st.allocate(r, 0, nat, 0.0);
  CHECK_THROWS_AS(st.allocate(r, 0, nat2, 1.0), std::logic_error);  // position served twice
  auto q = fixture::request(1, SfcKind::Ind40, 0, 1);
  CHECK_THROWS_AS(st.allocate(q, 0, nat, 0.01), std::logic_error);  // busy
  CHECK_THROWS_AS(st.instance({0, 9}), std::out_of_range);
  CHECK_THROWS_AS(st.uninstall_vnf({0, 9}, 0.0, false), std::out_of_range);
}

TEST_CASE("uninstall outcomes") {
  const auto c = default_catalog();
  NfvState st(fixture::line(2), c);
  const auto nat = *st.place_vnf(0, vnf(c, "NAT"));
  auto r = fixture::request(0, SfcKind::Ind40, 0, 1);
  st.allocate(r, 0, nat, 0.0);
  CHECK(st.uninstall_vnf(nat, 0.0, false) == UninstallResult::RefusedBusy);
  CHECK(st.instance_count(0, vnf(c, "NAT")) == 1);
  st.settle(1.0);
  CHECK_FALSE(st.instance(nat).allocated_request);
  CHECK(st.uninstall_vnf(nat, 1.0, true) == UninstallResult::RemovedNeeded);
  CHECK(st.instance_count(0, vnf(c, "NAT")) == 0);
  CHECK(st.dc(0).free == Resources{40, 256, 2048});
}

TEST_CASE("bandwidth reservations") {
  const auto c = default_catalog();
  const auto g = fixture::line(3);
  NfvState st(g, c);
  const std::vector<int> one{0};
  CHECK(st.reserve_bandwidth(one, 0, 1, 100'000, kHoldForever));
  CHECK(st.free_kbps(0) == 900'000);
  st.release_bandwidth(0);
  CHECK(st.free_kbps(0) == 1'000'000);
  st.release_bandwidth(0);  // idempotent
  CHECK(st.free_kbps(0) == 1'000'000);

  for (int i = 0; i < 15; ++i) CHECK(st.reserve_bandwidth(one, i, 1, 64, kHoldForever));
  CHECK(st.free_kbps(0) == 999'040);

  // All or nothing across a path.
  const std::vector<int> both{0, 1};
  CHECK(st.reserve_bandwidth(std::vector<int>{1}, 99, 1, 999'000, kHoldForever));
  CHECK_FALSE(st.reserve_bandwidth(both, 100, 1, 5'000, kHoldForever));
  CHECK(st.free_kbps(0) == 999'040);
  CHECK(st.free_kbps(1) == 1'000);
  CHECK(st.audit(0.0, true).ok());

  CHECK(st.reserve_bandwidth(both, 7, 1, 500, 2.0));
  CHECK(st.reserve_bandwidth(both, 7, 2, 500, 5.0));
  st.release_transfer(7, 1);
  CHECK(st.free_kbps(1) == 500);
  st.release_due(5.0);
  CHECK(st.free_kbps(1) == 1'000);
}

TEST_CASE("fuzzed operations keep exact accounting") {
  const auto c = default_catalog();
  TopologyConfig cfg;
  cfg.dc_count = 5;
  const auto g = build_network(cfg);
  Rng rng(31);
  for (int run = 0; run < 20; ++run) {
    NfvState st(g, c);
    // Shadow model maintained by the test itself.
    std::map<std::pair<int, int>, int> instances;  // (dc, slot) -> vnf
    std::vector<std::map<std::pair<int, int>, std::pair<std::int64_t, double>>> held(g.link_count());
    double now = 0.0;
    int next_request = 0;
    for (int op = 0; op < 400; ++op) {
      const auto kind = rng.uniform_int(0, 5);
      const int d = static_cast<int>(rng.uniform_int(0, g.dc_count() - 1));
      const int v = static_cast<int>(rng.uniform_int(0, 5));
      if (kind <= 1) {
        if (const auto id = st.place_vnf(d, v)) instances[{id->dc, id->slot}] = v;
      } else if (kind == 2 && !instances.empty()) {
        auto it = instances.begin();
        std::advance(it, rng.uniform_int(0, static_cast<std::int64_t>(instances.size()) - 1));
        const InstanceId id{it->first.first, it->first.second};
        if (st.uninstall_vnf(id, now, rng.uniform01() < 0.5) != UninstallResult::RefusedBusy)
          instances.erase(it);
      } else if (kind == 3) {
        std::vector<int> links;
        for (int l = 0; l < g.link_count(); ++l)
          if (rng.uniform01() < 0.3) links.push_back(l);
        const auto kbps = rng.uniform_int(1, 400'000);
        const int req = next_request++;
        bool fits = true;
        for (int l : links) {
          std::int64_t used = 0;
          for (const auto& [k, b] : held[l]) used += b.first;
          fits = fits && g.link(l).bandwidth_kbps - used >= kbps;
        }
        const double until = now + rng.uniform(0.0, 3.0);
        CHECK(st.reserve_bandwidth(links, req, 1, kbps, until) == fits);
        if (fits)
          for (int l : links) held[l][{req, 1}] = {kbps, until};
      } else if (kind == 4) {
        now += rng.uniform(0.0, 1.0);
        st.release_due(now);
        for (auto& m : held) std::erase_if(m, [&](const auto& kv) { return kv.second.second <= now; });
      } else if (const auto idle = st.idle_instance(d, v, now)) {
        auto r = fixture::request(0, SfcKind::Cg, 0, 1);
        const auto& chain = c.sfcs[r.sfc].chain;
        const auto pos = std::find(chain.begin(), chain.end(), v);
        if (pos != chain.end()) {
          r.next_vnf = static_cast<int>(pos - chain.begin());
          st.allocate(r, r.next_vnf, *idle, now);
        }
      }
      st.settle(now);

      for (int dc = 0; dc < g.dc_count(); ++dc) {
        Resources used;
        for (const auto& [key, type] : instances) {
          if (key.first != dc) continue;
          used.vcpu += c.vnfs[type].vcpu;
          used.ram_gb += c.vnfs[type].ram_gb;
          used.storage_gb += c.vnfs[type].storage_gb;
        }
        const auto& spec = g.dc(dc);
        CHECK(st.dc(dc).free == Resources{spec.vcpu - used.vcpu, spec.ram_gb - used.ram_gb,
                                          spec.storage_gb - used.storage_gb});
        CHECK(st.dc(dc).free.vcpu >= 0);
      }
      for (int l = 0; l < g.link_count(); ++l) {
        std::int64_t used = 0;
        for (const auto& [k, b] : held[l]) used += b.first;
        CHECK(st.free_kbps(l) == g.link(l).bandwidth_kbps - used);
        CHECK(st.free_kbps(l) >= 0);
      }
      CHECK(st.audit(now, true).ok());
    }
  }
}
