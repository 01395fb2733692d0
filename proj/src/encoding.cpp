#include "sfcsim/encoding.hpp"

#include <algorithm>
#include <array>

namespace sfcsim {

namespace {

constexpr double kBandwidthScale = 100'000.0;  // 100 Mbps in kbps

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

bool needs_placement(const World& world, const SfcRequest& r) {
  return !r.terminal() && !r.awaiting_assist &&
         r.next_vnf < world.catalog.sfcs[r.sfc].length();
}

struct TypeSummary {
  int count = 0;
  double min_remaining = 1.0;
  double bandwidth_sum = 0.0;
  double completion_sum = 0.0;
  std::array<int, kVnfKinds> next{};
};

void write_summary(const World& world, const std::array<TypeSummary, kSfcKinds>& sums,
                   std::vector<double>& out) {
  for (int s = 0; s < kSfcKinds; ++s) {
    const auto& sum = sums[s];
    const auto& type = world.catalog.sfcs[s];
    if (sum.count == 0) {
      out.insert(out.end(), kSfcFeatures, 0.0);
      continue;
    }
    const double n = sum.count;
    out.push_back(clamp01(n / type.bundle_max));
    out.push_back(sum.min_remaining);
    out.push_back(clamp01(sum.bandwidth_sum / n / kBandwidthScale));
    out.push_back(clamp01(sum.completion_sum / n));
    for (int v = 0; v < kVnfKinds; ++v) out.push_back(sum.next[v] / n);
  }
}

void add_request(const World& world, const SfcRequest& r, double t, TypeSummary& sum) {
  const auto& type = world.catalog.sfcs[r.sfc];
  const double remaining = (type.tolerance_ms - r.elapsed_at(t)) / world.catalog.max_tolerance_ms();
  ++sum.count;
  sum.min_remaining = std::min(sum.min_remaining, clamp01(remaining));
  sum.bandwidth_sum += static_cast<double>(r.bandwidth_kbps);
  sum.completion_sum += static_cast<double>(r.next_vnf) / type.length();
  ++sum.next[type.chain[r.next_vnf]];
}

}  // namespace

StateEncoding encode_state(const World& world, int cluster, int dc, double t) {
  StateEncoding s;
  s.a.reserve(kInputA);
  s.b.reserve(kInputB);
  s.c.reserve(kInputC);

  const auto& members = world.partition.clusters[cluster];
  std::array<bool, kVnfKinds> hostable{};
  for (int v = 0; v < kVnfKinds; ++v)
    for (int d : members)
      if (world.state.has_instance(d, v) || world.state.can_place(d, v)) {
        hostable[v] = true;
        break;
      }

  std::array<TypeSummary, kSfcKinds> at_dc{};
  std::array<TypeSummary, kSfcKinds> in_cluster{};
  std::array<bool, kVnfKinds> ready_demand{};
  int counted = 0;
  int unhostable = 0;
  int outside_dest = 0;
  for (int id : world.queues[cluster]) {
    const auto& r = world.requests[id];
    if (!needs_placement(world, r)) continue;
    add_request(world, r, t, in_cluster[r.sfc]);
    if (r.location == dc) add_request(world, r, t, at_dc[r.sfc]);
    ++counted;
    const auto& type = world.catalog.sfcs[r.sfc];
    if (r.ready_at <= t &&
        !(world.options.eager_drop && world.lower_bound_at(r, t) > type.tolerance_ms))
      ready_demand[type.chain[r.next_vnf]] = true;
    if (!hostable[world.catalog.sfcs[r.sfc].chain[r.next_vnf]]) ++unhostable;
    if (world.partition.cluster_of(r.dest_dc) != cluster) ++outside_dest;
  }
  write_summary(world, at_dc, s.a);

  const auto& rt = world.state.dc(dc);
  for (int v = 0; v < kVnfKinds; ++v) {
    const int cap = std::max(1, rt.capacity.vcpu / world.catalog.vnfs[v].vcpu);
    s.b.push_back(clamp01(static_cast<double>(world.state.instance_count(dc, v)) / cap));
    const int idle = world.state.idle_count(dc, v, t);
    s.b.push_back(clamp01(static_cast<double>(idle) / cap));
    const bool fits = idle > 0 || world.state.can_place(dc, v);
    s.b.push_back(fits && ready_demand[v] ? 1.0 : 0.0);
  }
  s.b.push_back(static_cast<double>(rt.free.vcpu) / rt.capacity.vcpu);
  s.b.push_back(static_cast<double>(rt.free.ram_gb) / rt.capacity.ram_gb);
  s.b.push_back(static_cast<double>(rt.free.storage_gb) / rt.capacity.storage_gb);

  write_summary(world, in_cluster, s.c);
  s.c.push_back(counted ? static_cast<double>(unhostable) / counted : 0.0);
  s.c.push_back(counted ? static_cast<double>(outside_dest) / counted : 0.0);
  return s;
}

}  // namespace sfcsim
