#include "sfcsim/workload.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "sfcsim/error.hpp"

namespace sfcsim {

using nlohmann::json;

int Catalog::vnf_index(std::string_view name) const {
  for (std::size_t i = 0; i < vnfs.size(); ++i)
    if (vnfs[i].name == name) return static_cast<int>(i);
  return -1;
}

int Catalog::sfc_index(std::string_view name) const {
  for (std::size_t i = 0; i < sfcs.size(); ++i)
    if (sfcs[i].name == name) return static_cast<int>(i);
  return -1;
}

double Catalog::max_tolerance_ms() const {
  double m = 0.0;
  for (const auto& s : sfcs) m = std::max(m, s.tolerance_ms);
  return m;
}

double Catalog::remaining_proc_ms(int sfc, int from) const {
  const auto& chain = sfcs[sfc].chain;
  double total = 0.0;
  for (std::size_t k = static_cast<std::size_t>(from); k < chain.size(); ++k)
    total += vnfs[chain[k]].proc_ms;
  return total;
}

void Catalog::validate() const {
  if (vnfs.size() != kVnfKinds || sfcs.size() != kSfcKinds)
    throw ConfigError("catalog must hold exactly 6 VNF types and 6 SFC types");
  for (const auto& v : vnfs) {
    if (v.vcpu <= 0 || v.ram_gb <= 0 || v.storage_gb <= 0 || !(v.proc_ms > 0.0))
      throw ConfigError("VNF " + v.name + " needs positive resources and processing time");
  }
  for (const auto& s : sfcs) {
    if (s.chain.empty()) throw ConfigError("SFC " + s.name + " has an empty chain");
    for (int v : s.chain)
      if (v < 0 || v >= static_cast<int>(vnfs.size()))
        throw ConfigError("SFC " + s.name + " references an unknown VNF");
    if (!(s.tolerance_ms > 0.0)) throw ConfigError("SFC " + s.name + " needs a positive tolerance");
    if (s.bw_min_kbps <= 0 || s.bw_max_kbps < s.bw_min_kbps)
      throw ConfigError("SFC " + s.name + " has an invalid bandwidth range");
    if (s.bundle_min < 0 || s.bundle_max < s.bundle_min)
      throw ConfigError("SFC " + s.name + " has an empty bundle range");
  }
}

Catalog default_catalog() {
  Catalog c;
  // vCPU, RAM GB, storage GB, processing ms
  c.vnfs = {
      {"NAT", 1, 4, 7, 0.06},  {"FW", 9, 5, 1, 0.03}, {"VOC", 5, 11, 13, 0.11},
      {"TM", 13, 7, 7, 0.07},  {"WO", 5, 2, 5, 0.08}, {"IDPS", 11, 15, 2, 0.02},
  };
  constexpr int nat = 0, fw = 1, voc = 2, tm = 3, wo = 4, idps = 5;
  // chain, bandwidth kbps (min, max), tolerance ms, bundle range
  c.sfcs = {
      {"CG", {nat, fw, voc, wo, idps}, 4000, 4000, 80.0, 40, 55},
      {"AR", {nat, fw, tm, voc, idps}, 100000, 100000, 10.0, 1, 4},
      {"VoIP", {nat, fw, tm, fw, nat}, 64, 64, 100.0, 100, 200},
      {"VS", {nat, fw, tm, voc, idps}, 4000, 4000, 100.0, 50, 100},
      {"MIoT", {nat, fw, idps}, 1000, 50000, 5.0, 10, 15},
      {"Ind4.0", {nat, fw}, 70000, 70000, 8.0, 1, 4},
  };
  return c;
}

const char* to_string(RequestStatus s) {
  switch (s) {
    case RequestStatus::Pending: return "pending";
    case RequestStatus::InService: return "in-service";
    case RequestStatus::Accepted: return "accepted";
    case RequestStatus::Dropped: return "dropped";
  }
  return "?";
}

const char* to_string(DropReason r) {
  switch (r) {
    case DropReason::None: return "none";
    case DropReason::Deadline: return "deadline";
    case DropReason::NoHost: return "no-host";
    case DropReason::NoPath: return "no-path";
  }
  return "?";
}

void DelayLedger::add(const DelayHop& hop) {
  propagation_total += hop.propagation_ms;
  processing_total += hop.wait_ms + hop.processing_ms;
  hops.push_back(hop);
}

double DelayLedger::recompute() const {
  double propagation = 0.0;
  double processing = 0.0;
  for (const auto& h : hops) {
    propagation += h.propagation_ms;
    processing += h.wait_ms + h.processing_ms;
  }
  return propagation + processing;
}

double SfcRequest::elapsed_at(double t) const {
  return ledger.accrued() + (t > ready_at ? t - ready_at : 0.0);
}

void reset_runtime(SfcRequest& r) {
  r.next_vnf = 0;
  r.placements.clear();
  r.ledger = {};
  r.status = RequestStatus::Pending;
  r.drop_reason = DropReason::None;
  r.drop_lower_bound = 0.0;
  r.finished_at = 0.0;
  r.location = r.source_dc;
  r.ready_at = r.arrival_ms;
  r.awaiting_assist = false;
  r.origin_cluster = -1;
  r.holder_cluster = -1;
  r.transfer_seq = 0;
}

std::vector<SfcRequest> generate_bundles(const Catalog& catalog, int dc_count, double scale,
                                         Rng& rng) {
  if (!(scale > 0.0)) throw std::invalid_argument("demand scale must be positive");
  if (dc_count < 2) throw std::invalid_argument("need at least two data centers");
  std::vector<SfcRequest> out;
  for (int s = 0; s < static_cast<int>(catalog.sfcs.size()); ++s) {
    const auto& type = catalog.sfcs[s];
    const auto drawn = rng.uniform_int(type.bundle_min, type.bundle_max);
    const auto count = static_cast<long>(std::llround(scale * static_cast<double>(drawn)));
    for (long i = 0; i < count; ++i) {
      SfcRequest r;
      r.id = static_cast<int>(out.size());
      r.sfc = s;
      r.bandwidth_kbps = type.ranged_bandwidth()
                             ? rng.uniform_int(type.bw_min_kbps, type.bw_max_kbps)
                             : type.bw_min_kbps;
      r.source_dc = static_cast<int>(rng.uniform_int(0, dc_count - 1));
      // Draw from the other dc_count - 1 DCs and skip over the source.
      int dest = static_cast<int>(rng.uniform_int(0, dc_count - 2));
      if (dest >= r.source_dc) ++dest;
      r.dest_dc = dest;
      r.arrival_ms = 0.0;
      reset_runtime(r);
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_workload(std::ostream& out, const Catalog& catalog,
                    const std::vector<SfcRequest>& requests) {
  for (const auto& r : requests) {
    json j = {{"id", r.id},
              {"sfc", catalog.sfcs.at(r.sfc).name},
              {"bandwidth_kbps", r.bandwidth_kbps},
              {"source", r.source_dc},
              {"dest", r.dest_dc},
              {"arrival_ms", r.arrival_ms}};
    out << j.dump() << '\n';
  }
}

std::vector<SfcRequest> read_workload(std::istream& in, const Catalog& catalog, int dc_count) {
  std::vector<SfcRequest> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      SfcRequest r;
      r.id = j.at("id").get<int>();
      r.sfc = catalog.sfc_index(j.at("sfc").get<std::string>());
      if (r.sfc < 0) throw ConfigError("unknown SFC type");
      r.bandwidth_kbps = j.at("bandwidth_kbps").get<std::int64_t>();
      r.source_dc = j.at("source").get<int>();
      r.dest_dc = j.at("dest").get<int>();
      r.arrival_ms = j.at("arrival_ms").get<double>();
      if (r.source_dc < 0 || r.source_dc >= dc_count || r.dest_dc < 0 || r.dest_dc >= dc_count ||
          r.source_dc == r.dest_dc)
        throw ConfigError("source/destination out of range");
      if (r.bandwidth_kbps <= 0) throw ConfigError("bandwidth must be positive");
      if (r.id != static_cast<int>(out.size())) throw ConfigError("ids must be dense and ordered");
      reset_runtime(r);
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ConfigError("workload line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("workload line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace sfcsim
