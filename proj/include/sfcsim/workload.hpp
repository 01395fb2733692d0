#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sfcsim/rng.hpp"

namespace sfcsim {

// Indices into the default catalog. The set of types is fixed; config
// overrides may change their numbers but not add or remove types.
enum class VnfKind { Nat = 0, Fw, Voc, Tm, Wo, Idps };
enum class SfcKind { Cg = 0, Ar, Voip, Vs, Miot, Ind40 };

inline constexpr int kVnfKinds = 6;
inline constexpr int kSfcKinds = 6;

struct VnfType {
  std::string name;
  int vcpu = 0;
  int ram_gb = 0;
  int storage_gb = 0;
  double proc_ms = 0.0;
};

struct SfcType {
  std::string name;
  std::vector<int> chain;  // VNF type indices, in processing order
  std::int64_t bw_min_kbps = 0;
  std::int64_t bw_max_kbps = 0;
  double tolerance_ms = 0.0;
  int bundle_min = 0;
  int bundle_max = 0;

  bool ranged_bandwidth() const { return bw_min_kbps != bw_max_kbps; }
  int length() const { return static_cast<int>(chain.size()); }
};

struct Catalog {
  std::vector<VnfType> vnfs;
  std::vector<SfcType> sfcs;

  int vnf_index(std::string_view name) const;  // -1 if unknown
  int sfc_index(std::string_view name) const;
  double max_tolerance_ms() const;
  // Sum of processing times of chain positions [from, end).
  double remaining_proc_ms(int sfc, int from) const;
  void validate() const;  // throws ConfigError
};

Catalog default_catalog();

enum class RequestStatus { Pending, InService, Accepted, Dropped };
enum class DropReason { None, Deadline, NoHost, NoPath };

const char* to_string(RequestStatus s);
const char* to_string(DropReason r);

struct InstanceId {
  int dc = -1;
  int slot = -1;
  friend bool operator==(const InstanceId&, const InstanceId&) = default;
};

// Where and when one chain position was processed (the per-VNF assignment).
struct Placement {
  int dc = -1;
  InstanceId instance;
  double decided_at = 0.0;
  double start = 0.0;
  double finish = 0.0;
};

enum class HopKind { Allocation, Transfer, Delivery };

struct DelayHop {
  HopKind kind = HopKind::Allocation;
  int from_dc = -1;
  int to_dc = -1;
  double at = 0.0;  // when the hop was decided
  double wait_ms = 0.0;
  double propagation_ms = 0.0;
  double processing_ms = 0.0;
};

// E2E decomposition: propagation plus processing, where processing includes
// the waiting before each allocation.
struct DelayLedger {
  double propagation_total = 0.0;
  double processing_total = 0.0;
  std::vector<DelayHop> hops;

  void add(const DelayHop& hop);
  double accrued() const { return propagation_total + processing_total; }
  // Sums the hop log from scratch, in log order.
  double recompute() const;
};

struct SfcRequest {
  int id = 0;
  int sfc = 0;
  std::int64_t bandwidth_kbps = 0;
  int source_dc = 0;
  int dest_dc = 0;
  double arrival_ms = 0.0;

  // Runtime state, owned by the simulation.
  int next_vnf = 0;
  std::vector<Placement> placements;
  DelayLedger ledger;
  RequestStatus status = RequestStatus::Pending;
  DropReason drop_reason = DropReason::None;
  double drop_lower_bound = 0.0;  // E2E lower bound proven at drop time
  double finished_at = 0.0;
  int location = 0;        // DC currently holding the request's data
  double ready_at = 0.0;   // when it can be handled next
  bool awaiting_assist = false;
  int origin_cluster = -1;
  int holder_cluster = -1;
  int transfer_seq = 0;

  bool terminal() const {
    return status == RequestStatus::Accepted || status == RequestStatus::Dropped;
  }
  // The accrued delay seen at time t: the ledger plus the current wait.
  double elapsed_at(double t) const;
};

// Reset runtime fields to the generated state (pending at source at arrival).
void reset_runtime(SfcRequest& r);

// Per SFC type: count = round(scale * U{bundle_min..bundle_max}); source and
// destination drawn uniformly and distinct; ranged bandwidth drawn per request.
std::vector<SfcRequest> generate_bundles(const Catalog& catalog, int dc_count, double scale,
                                         Rng& rng);

// One JSON object per line: id, sfc, bandwidth_kbps, source, dest, arrival_ms.
void write_workload(std::ostream& out, const Catalog& catalog,
                    const std::vector<SfcRequest>& requests);
std::vector<SfcRequest> read_workload(std::istream& in, const Catalog& catalog, int dc_count);

}  // namespace sfcsim
