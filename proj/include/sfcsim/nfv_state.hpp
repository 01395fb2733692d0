#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfcsim/topology.hpp"
#include "sfcsim/workload.hpp"

namespace sfcsim {

struct Resources {
  int vcpu = 0;
  int ram_gb = 0;
  int storage_gb = 0;

  friend bool operator==(const Resources&, const Resources&) = default;
};

// Actor id for mutations made by the general agent (local agents use their cluster id).
inline constexpr int kGeneralActor = -1;
inline constexpr double kHoldForever = std::numeric_limits<double>::infinity();

struct VnfInstance {
  InstanceId id;
  int vnf = 0;
  double busy_until = 0.0;
  std::optional<int> allocated_request;
  int installed_by = kGeneralActor;
};

struct DcRuntime {
  int dc = 0;
  Resources capacity;
  Resources free;
  std::vector<std::optional<VnfInstance>> slots;  // slot index = InstanceId::slot
  std::vector<int> count_by_type;
};

struct Reservation {
  int request = 0;
  int transfer = 0;  // per-request transfer sequence number
  std::int64_t kbps = 0;
  double release_at = kHoldForever;
  int actor = kGeneralActor;
};

struct LinkRuntime {
  int link = 0;
  std::int64_t capacity_kbps = 0;
  std::vector<Reservation> reservations;
};

enum class UninstallResult { Removed, RemovedNeeded, RefusedBusy };

struct AllocationRecord {
  int request = 0;
  int chain_index = 0;
  InstanceId instance;
  int dc = 0;
  double decided_at = 0.0;
  double wait_ms = 0.0;
  double propagation_ms = 0.0;
  double start = 0.0;
  double finish = 0.0;
};

struct AuditReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Mutable substrate: installed instances, DC residual resources and link
// residual bandwidth. All mutations keep the accounting exact (integers).
class NfvState {
 public:
  NfvState() = default;
  NfvState(const NetworkGraph& graph, const Catalog& catalog);

  int dc_count() const { return static_cast<int>(dcs_.size()); }
  const DcRuntime& dc(int id) const { return dcs_.at(id); }
  const LinkRuntime& link(int id) const { return links_.at(id); }
  std::span<const std::int64_t> free_bandwidth() const { return free_kbps_; }
  std::int64_t free_kbps(int link) const { return free_kbps_.at(link); }
  const Catalog& catalog() const { return catalog_; }

  bool can_place(int dc, int vnf) const;
  // Installs an idle instance; nullopt when the DC lacks resources.
  std::optional<InstanceId> place_vnf(int dc, int vnf, int actor = kGeneralActor);
  // Busy instances are refused. `needed` marks an idle instance that pending
  // demand still wants; it is removed but the caller gets the penalty signal.
  // Throws std::out_of_range for unknown instances.
  UninstallResult uninstall_vnf(InstanceId id, double now, bool needed);

  const VnfInstance& instance(InstanceId id) const;
  // Lowest-slot idle instance of the type, if any.
  std::optional<InstanceId> idle_instance(int dc, int vnf, double now) const;
  int instance_count(int dc, int vnf) const { return dcs_.at(dc).count_by_type.at(vnf); }
  int idle_count(int dc, int vnf, double now) const;
  bool has_instance(int dc, int vnf) const { return instance_count(dc, vnf) > 0; }

  // Allocates chain position `chain_index` of the request to an idle instance.
  // The request's data arrives after `propagation_ms`, then processing runs.
  // Throws std::logic_error on type mismatch, busy instance or out-of-order index.
  AllocationRecord allocate(SfcRequest& request, int chain_index, InstanceId id, double now,
                            double propagation_ms = 0.0, int from_dc = -1);

  // All-or-nothing reservation of `kbps` on every link; false if any link is short.
  bool reserve_bandwidth(std::span<const int> links, int request, int transfer, std::int64_t kbps,
                         double release_at, int actor = kGeneralActor);
  // Releases every reservation held by the request. Idempotent.
  void release_bandwidth(int request);
  // Releases one reservation (request, transfer); used to roll back a path pair.
  void release_transfer(int request, int transfer);
  // Releases reservations whose hold ended at or before `now`.
  void release_due(double now);
  // Clears finished allocations (busy_until <= now).
  void settle(double now);

  // Recomputes all accounting from the instance and reservation sets.
  AuditReport audit(double now, bool check_allocation_flags) const;
  nlohmann::json snapshot(double now) const;

 private:
  VnfInstance& mutable_instance(InstanceId id);

  Catalog catalog_;
  std::vector<DcRuntime> dcs_;
  std::vector<LinkRuntime> links_;
  std::vector<std::int64_t> free_kbps_;
};

}  // namespace sfcsim
