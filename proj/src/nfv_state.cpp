#include "sfcsim/nfv_state.hpp"

#include <algorithm>
#include <stdexcept>

namespace sfcsim {

namespace {

Resources footprint(const VnfType& v) { return {v.vcpu, v.ram_gb, v.storage_gb}; }

}  // namespace

NfvState::NfvState(const NetworkGraph& graph, const Catalog& catalog) : catalog_(catalog) {
  dcs_.reserve(graph.dc_count());
  for (const auto& spec : graph.dcs()) {
    DcRuntime rt;
    rt.dc = spec.id;
    rt.capacity = {spec.vcpu, spec.ram_gb, spec.storage_gb};
    rt.free = rt.capacity;
    rt.count_by_type.assign(catalog.vnfs.size(), 0);
    dcs_.push_back(std::move(rt));
  }
  links_.reserve(graph.link_count());
  for (const auto& l : graph.links()) {
    links_.push_back({l.id, l.bandwidth_kbps, {}});
    free_kbps_.push_back(l.bandwidth_kbps);
  }
}

bool NfvState::can_place(int dc, int vnf) const {
  const auto& f = dcs_.at(dc).free;
  const auto& v = catalog_.vnfs.at(vnf);
  return f.vcpu >= v.vcpu && f.ram_gb >= v.ram_gb && f.storage_gb >= v.storage_gb;
}

std::optional<InstanceId> NfvState::place_vnf(int dc, int vnf, int actor) {
  if (!can_place(dc, vnf)) return std::nullopt;
  auto& rt = dcs_[dc];
  const auto need = footprint(catalog_.vnfs[vnf]);
  rt.free.vcpu -= need.vcpu;
  rt.free.ram_gb -= need.ram_gb;
  rt.free.storage_gb -= need.storage_gb;

  int slot = 0;
  while (slot < static_cast<int>(rt.slots.size()) && rt.slots[slot]) ++slot;
  if (slot == static_cast<int>(rt.slots.size())) rt.slots.emplace_back();
  VnfInstance inst;
  inst.id = {dc, slot};
  inst.vnf = vnf;
  inst.installed_by = actor;
  rt.slots[slot] = inst;
  ++rt.count_by_type[vnf];
  return inst.id;
}

const VnfInstance& NfvState::instance(InstanceId id) const {
  const auto& rt = dcs_.at(id.dc);
  if (id.slot < 0 || id.slot >= static_cast<int>(rt.slots.size()) || !rt.slots[id.slot])
    throw std::out_of_range("unknown VNF instance");
  return *rt.slots[id.slot];
}

VnfInstance& NfvState::mutable_instance(InstanceId id) {
  return const_cast<VnfInstance&>(std::as_const(*this).instance(id));
}

UninstallResult NfvState::uninstall_vnf(InstanceId id, double now, bool needed) {
  const auto& inst = instance(id);
  if (inst.busy_until > now) return UninstallResult::RefusedBusy;
  auto& rt = dcs_[id.dc];
  const auto give_back = footprint(catalog_.vnfs[inst.vnf]);
  --rt.count_by_type[inst.vnf];
  rt.free.vcpu += give_back.vcpu;
  rt.free.ram_gb += give_back.ram_gb;
  rt.free.storage_gb += give_back.storage_gb;
  rt.slots[id.slot].reset();
  while (!rt.slots.empty() && !rt.slots.back()) rt.slots.pop_back();
  return needed ? UninstallResult::RemovedNeeded : UninstallResult::Removed;
}

std::optional<InstanceId> NfvState::idle_instance(int dc, int vnf, double now) const {
  const auto& rt = dcs_.at(dc);
  if (rt.count_by_type.at(vnf) == 0) return std::nullopt;
  for (const auto& slot : rt.slots)
    if (slot && slot->vnf == vnf && slot->busy_until <= now) return slot->id;
  return std::nullopt;
}

int NfvState::idle_count(int dc, int vnf, double now) const {
  const auto& rt = dcs_.at(dc);
  if (rt.count_by_type.at(vnf) == 0) return 0;
  int n = 0;
  for (const auto& slot : rt.slots)
    if (slot && slot->vnf == vnf && slot->busy_until <= now) ++n;
  return n;
}

AllocationRecord NfvState::allocate(SfcRequest& request, int chain_index, InstanceId id,
                                    double now, double propagation_ms, int from_dc) {
  auto& inst = mutable_instance(id);
  const auto& type = catalog_.sfcs.at(request.sfc);
  if (chain_index != request.next_vnf || chain_index >= type.length())
    throw std::logic_error("allocate: chain position already served or out of order");
  if (type.chain[chain_index] != inst.vnf) throw std::logic_error("allocate: VNF type mismatch");
  if (inst.busy_until > now) throw std::logic_error("allocate: instance is busy");
  if (request.terminal()) throw std::logic_error("allocate: request already finished");

  const double proc = catalog_.vnfs[inst.vnf].proc_ms;
  AllocationRecord rec;
  rec.request = request.id;
  rec.chain_index = chain_index;
  rec.instance = id;
  rec.dc = id.dc;
  rec.decided_at = now;
  rec.wait_ms = now > request.ready_at ? now - request.ready_at : 0.0;
  rec.propagation_ms = propagation_ms;
  rec.start = now + propagation_ms;
  rec.finish = rec.start + proc;

  inst.busy_until = rec.finish;
  inst.allocated_request = request.id;

  request.ledger.add({HopKind::Allocation, from_dc < 0 ? request.location : from_dc, id.dc, now,
                      rec.wait_ms, propagation_ms, proc});
  request.placements.push_back({id.dc, id, now, rec.start, rec.finish});
  request.next_vnf = chain_index + 1;
  request.location = id.dc;
  request.ready_at = rec.finish;
  request.status = RequestStatus::InService;
  return rec;
}

bool NfvState::reserve_bandwidth(std::span<const int> links, int request, int transfer,
                                 std::int64_t kbps, double release_at, int actor) {
  for (int l : links)
    if (free_kbps_.at(l) < kbps) return false;
  for (int l : links) {
    free_kbps_[l] -= kbps;
    links_[l].reservations.push_back({request, transfer, kbps, release_at, actor});
  }
  return true;
}

void NfvState::release_bandwidth(int request) {
  for (auto& lr : links_) {
    auto& res = lr.reservations;
    for (auto it = res.begin(); it != res.end();) {
      if (it->request == request) {
        free_kbps_[lr.link] += it->kbps;
        it = res.erase(it);
      } else {
        ++it;
      }
    }
  }
}

void NfvState::release_transfer(int request, int transfer) {
  for (auto& lr : links_) {
    auto& res = lr.reservations;
    for (auto it = res.begin(); it != res.end();) {
      if (it->request == request && it->transfer == transfer) {
        free_kbps_[lr.link] += it->kbps;
        it = res.erase(it);
      } else {
        ++it;
      }
    }
  }
}

void NfvState::release_due(double now) {
  for (auto& lr : links_) {
    auto& res = lr.reservations;
    for (auto it = res.begin(); it != res.end();) {
      if (it->release_at <= now) {
        free_kbps_[lr.link] += it->kbps;
        it = res.erase(it);
      } else {
        ++it;
      }
    }
  }
}

void NfvState::settle(double now) {
  for (auto& rt : dcs_)
    for (auto& slot : rt.slots)
      if (slot && slot->allocated_request && slot->busy_until <= now) slot->allocated_request.reset();
}

AuditReport NfvState::audit(double now, bool check_allocation_flags) const {
  AuditReport report;
  auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };
  for (const auto& rt : dcs_) {
    Resources used;
    std::vector<int> counts(catalog_.vnfs.size(), 0);
    for (const auto& slot : rt.slots) {
      if (!slot) continue;
      const auto& v = catalog_.vnfs[slot->vnf];
      used.vcpu += v.vcpu;
      used.ram_gb += v.ram_gb;
      used.storage_gb += v.storage_gb;
      ++counts[slot->vnf];
      if (check_allocation_flags && slot->allocated_request.has_value() != (slot->busy_until > now))
        fail("dc " + std::to_string(rt.dc) + ": allocation flag disagrees with busy_until");
    }
    const Resources expect{rt.capacity.vcpu - used.vcpu, rt.capacity.ram_gb - used.ram_gb,
                           rt.capacity.storage_gb - used.storage_gb};
    if (!(expect == rt.free)) fail("dc " + std::to_string(rt.dc) + ": free resources drifted");
    if (rt.free.vcpu < 0 || rt.free.ram_gb < 0 || rt.free.storage_gb < 0)
      fail("dc " + std::to_string(rt.dc) + ": capacity exceeded (C1/C2)");
    if (rt.free.vcpu > rt.capacity.vcpu || rt.free.ram_gb > rt.capacity.ram_gb ||
        rt.free.storage_gb > rt.capacity.storage_gb)
      fail("dc " + std::to_string(rt.dc) + ": free above capacity");
    if (counts != rt.count_by_type) fail("dc " + std::to_string(rt.dc) + ": instance count drifted");
  }
  for (const auto& lr : links_) {
    std::int64_t reserved = 0;
    for (const auto& r : lr.reservations) reserved += r.kbps;
    if (free_kbps_[lr.link] != lr.capacity_kbps - reserved)
      fail("link " + std::to_string(lr.link) + ": free bandwidth drifted");
    if (free_kbps_[lr.link] < 0) fail("link " + std::to_string(lr.link) + ": bandwidth exceeded (C4)");
  }
  return report;
}

nlohmann::json NfvState::snapshot(double now) const {
  using nlohmann::json;
  json dcs = json::array();
  for (const auto& rt : dcs_) {
    json instances = json::array();
    for (const auto& slot : rt.slots) {
      if (!slot) continue;
      instances.push_back({{"slot", slot->id.slot},
                           {"vnf", catalog_.vnfs[slot->vnf].name},
                           {"busy_until", slot->busy_until},
                           {"busy", slot->busy_until > now},
                           {"request", slot->allocated_request ? json(*slot->allocated_request)
                                                               : json(nullptr)}});
    }
    dcs.push_back({{"dc", rt.dc},
                   {"capacity", {{"vcpu", rt.capacity.vcpu}, {"ram_gb", rt.capacity.ram_gb},
                                 {"storage_gb", rt.capacity.storage_gb}}},
                   {"free", {{"vcpu", rt.free.vcpu}, {"ram_gb", rt.free.ram_gb},
                             {"storage_gb", rt.free.storage_gb}}},
                   {"instances", std::move(instances)}});
  }
  json links = json::array();
  for (const auto& lr : links_) {
    json res = json::array();
    for (const auto& r : lr.reservations)
      res.push_back({{"request", r.request}, {"transfer", r.transfer}, {"kbps", r.kbps}});
    links.push_back({{"link", lr.link},
                     {"capacity_kbps", lr.capacity_kbps},
                     {"free_kbps", free_kbps_[lr.link]},
                     {"reservations", std::move(res)}});
  }
  return {{"time_ms", now}, {"dcs", std::move(dcs)}, {"links", std::move(links)}};
}

}  // namespace sfcsim
