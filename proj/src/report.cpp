#include "sfcsim/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sfcsim/error.hpp"

namespace sfcsim {

using json = nlohmann::ordered_json;

namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s = buf;
  const auto dot = s.find('.');
  if (dot != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

namespace {

std::string ratio(long num, long den) {
  if (den == 0) return "";
  return format_number(static_cast<double>(num) / static_cast<double>(den));
}

void csv_row(std::ostringstream& out, const CellResult& cell, const std::string& type,
             const TypeCounts& c) {
  const auto& t = cell.totals;
  out << cell.scenario_id << ',' << cell.spec.seed << ',' << t.dc_count << ',' << t.cluster_limit
      << ',' << t.cluster_count << ',' << format_number(cell.spec.scale) << ',' << type << ','
      << c.generated << ',' << c.accepted << ',' << c.dropped << ',' << ratio(c.accepted, c.generated)
      << ',' << (c.accepted ? format_number(c.e2e_sum_ms / static_cast<double>(c.accepted)) : "")
      << '\n';
}

json counts_json(const TypeCounts& c) {
  json j = {{"generated", c.generated}, {"accepted", c.accepted}, {"dropped", c.dropped}};
  j["acc_ratio"] = c.generated ? json(static_cast<double>(c.accepted) / c.generated) : json();
  j["mean_e2e_ms"] = c.accepted ? json(c.e2e_sum_ms / c.accepted) : json();
  return j;
}

json episode_json(const EpisodeReport& r, const Catalog& catalog) {
  json j;
  j["seed"] = r.seed;
  j["dc_count"] = r.dc_count;
  j["cluster_limit"] = r.cluster_limit;
  j["cluster_count"] = r.cluster_count;
  j["scale"] = r.scale;
  j["steps"] = r.steps;
  j["generated"] = r.generated;
  j["accepted"] = r.accepted;
  j["dropped"] = r.dropped;
  j["acc_ratio"] = r.acceptance_ratio() ? json(*r.acceptance_ratio()) : json();
  j["empty_workload"] = r.empty_workload();
  j["drop_reasons"] = {{"deadline", r.drop_reasons[static_cast<int>(DropReason::Deadline)]},
                       {"no_host", r.drop_reasons[static_cast<int>(DropReason::NoHost)]},
                       {"no_path", r.drop_reasons[static_cast<int>(DropReason::NoPath)]}};
  json types = json::object();
  for (std::size_t s = 0; s < r.per_type.size(); ++s)
    types[catalog.sfcs[s].name] = counts_json(r.per_type[s]);
  j["per_type"] = std::move(types);
  json clusters = json::array();
  for (const auto& row : r.per_cluster) {
    json c = json::object();
    for (std::size_t s = 0; s < row.size(); ++s) c[catalog.sfcs[s].name] = counts_json(row[s]);
    clusters.push_back(std::move(c));
  }
  j["per_cluster"] = std::move(clusters);
  j["rewards"] = {{"total", r.reward_total},
                  {"accept_count", r.accept_rewards},
                  {"drop_count", r.drop_rewards}};
  j["actions"] = r.actions;
  j["invalid_actions"] = r.invalid_actions;
  j["handoffs"] = r.handoffs;
  j["path_counters"] = {{"dijkstra_calls", r.dijkstra_calls},
                        {"max_settled", r.max_settled},
                        {"dfs_edges_visited", r.dfs_edges_visited}};
  return j;
}

}  // namespace

std::string report_csv(const std::vector<CellResult>& cells, const Catalog& catalog) {
  std::ostringstream out;
  out << "scenario_id,seed,dc_count,cluster_limit,cluster_count,scale,sfc_type,generated,accepted,"
         "dropped,acc_ratio,mean_e2e_ms\n";
  for (const auto& cell : cells) {
    TypeCounts all;
    for (std::size_t s = 0; s < cell.totals.per_type.size(); ++s) {
      csv_row(out, cell, catalog.sfcs[s].name, cell.totals.per_type[s]);
      all.merge(cell.totals.per_type[s]);
    }
    csv_row(out, cell, "ALL", all);
  }
  return out.str();
}

std::string report_json(const std::vector<CellResult>& cells, const Catalog& catalog) {
  json root;
  json arr = json::array();
  for (const auto& cell : cells) {
    json c;
    c["scenario_id"] = cell.scenario_id;
    c["seed"] = cell.spec.seed;
    c["dc_count"] = cell.spec.dc_count;
    c["cluster_limit"] = cell.spec.cluster_limit;
    c["scale"] = cell.spec.scale;
    c["totals"] = episode_json(cell.totals, catalog);
    json eps = json::array();
    for (const auto& e : cell.episodes) eps.push_back(episode_json(e, catalog));
    c["episodes"] = std::move(eps);
    arr.push_back(std::move(c));
  }
  root["cells"] = std::move(arr);
  return root.dump(2) + "\n";
}

std::string handoff_csv(const std::vector<CellResult>& cells) {
  std::ostringstream out;
  out << "scenario_id,seed,episode,request,from_cluster,to_cluster,at_ms\n";
  for (const auto& cell : cells)
    for (std::size_t e = 0; e < cell.episodes.size(); ++e)
      for (const auto& h : cell.episodes[e].handoff_log)
        out << cell.scenario_id << ',' << cell.spec.seed << ',' << e << ',' << h.request << ','
            << h.from_cluster << ',' << h.to_cluster << ',' << format_number(h.at) << '\n';
  return out.str();
}

std::string curve_csv(const std::vector<CurveRow>& rows) {
  std::ostringstream out;
  out << "episode,mean_reward,loss,epsilon,acc_ratio\n";
  for (const auto& r : rows)
    out << r.episode << ',' << format_number(r.mean_reward) << ','
        << (r.loss ? format_number(*r.loss) : "") << ',' << format_number(r.epsilon) << ','
        << (r.acceptance_ratio ? format_number(*r.acceptance_ratio) : "") << '\n';
  return out.str();
}

}  // namespace sfcsim
