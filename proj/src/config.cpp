#include "sfcsim/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

#include "json.hpp"
#include "sfcsim/error.hpp"

namespace sfcsim {

using json = nlohmann::ordered_json;

namespace {

// A JSON object whose keys must all be consumed.
class Section {
 public:
  Section(const json* j, std::string path) : j_(j), path_(std::move(path)) {
    if (j_ && !j_->is_object()) fail("must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    if (!j_ || !j_->contains(key)) return;
    out = convert<T>(j_->at(key), path_ + "." + key);
  }

  Section child(const char* key) {
    used_.insert(key);
    if (!j_ || !j_->contains(key)) return Section(nullptr, path_ + "." + key);
    return Section(&j_->at(key), path_ + "." + key);
  }

  const json* raw(const char* key) {
    used_.insert(key);
    if (!j_ || !j_->contains(key)) return nullptr;
    return &j_->at(key);
  }

  void finish() const {
    if (!j_) return;
    for (const auto& [k, v] : j_->items())
      if (!used_.count(k)) throw ConfigError("unknown key " + path_ + "." + k);
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_ + " " + what); }

  template <typename T>
  static T convert(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where + " must be a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where + " must be a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) throw ConfigError(where + " must be a non-negative integer");
      return v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
      const auto x = v.get<std::int64_t>();
      if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max())
        throw ConfigError(where + " is out of range");
      return static_cast<T>(x);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where + " must be a number");
      return v.get<double>();
    } else {
      if (!v.is_array()) throw ConfigError(where + " must be an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(convert<typename T::value_type>(v[i], where + "[" + std::to_string(i) + "]"));
      return out;
    }
  }

 private:
  const json* j_;
  std::string path_;
  std::set<std::string> used_;
};

const char* to_key(BandwidthHold h) {
  return h == BandwidthHold::PerTransfer ? "per_transfer" : "whole_lifetime";
}
const char* to_key(DcSelection d) {
  return d == DcSelection::RoundRobin ? "round_robin" : "most_pending";
}

void read_topology(Section s, RunConfig& c) {
  auto& t = c.topology;
  s.get("dc_count", t.dc_count);
  s.get("area_km", t.area_km);
  s.get("radius_km", t.radius_km);
  s.get("storage_gb", t.storage_gb);
  s.get("vcpu", t.vcpu);
  s.get("ram_gb", t.ram_gb);
  s.get("link_bandwidth_kbps", t.link_bandwidth_kbps);
  if (const json* dcs = s.raw("dcs")) {
    if (!dcs->is_array()) throw ConfigError("topology.dcs must be an array");
    t.dcs.clear();
    for (std::size_t i = 0; i < dcs->size(); ++i) {
      Section d(&(*dcs)[i], "topology.dcs[" + std::to_string(i) + "]");
      DataCenterSpec spec;
      spec.id = static_cast<int>(i);
      spec.storage_gb = t.storage_gb;
      spec.vcpu = t.vcpu;
      spec.ram_gb = t.ram_gb;
      d.get("id", spec.id);
      d.get("x_km", spec.position.x_km);
      d.get("y_km", spec.position.y_km);
      d.get("storage_gb", spec.storage_gb);
      d.get("vcpu", spec.vcpu);
      d.get("ram_gb", spec.ram_gb);
      d.finish();
      t.dcs.push_back(spec);
    }
    if (!t.dcs.empty()) t.dc_count = static_cast<int>(t.dcs.size());
  }
  if (const json* links = s.raw("links")) {
    if (!links->is_array()) throw ConfigError("topology.links must be an array");
    t.links.clear();
    for (std::size_t i = 0; i < links->size(); ++i) {
      Section l(&(*links)[i], "topology.links[" + std::to_string(i) + "]");
      ExplicitLink link;
      l.get("a", link.a);
      l.get("b", link.b);
      const std::string where = "topology.links[" + std::to_string(i) + "]";
      if (const json* bw = l.raw("bandwidth_kbps"))
        link.bandwidth_kbps = Section::convert<std::int64_t>(*bw, where + ".bandwidth_kbps");
      if (const json* dist = l.raw("distance_km"))
        link.distance_km = Section::convert<double>(*dist, where + ".distance_km");
      l.finish();
      t.links.push_back(link);
    }
  }
  s.finish();
}

void read_workload(Section s, RunConfig& c) {
  s.get("scale", c.scale);
  auto& cat = c.catalog;
  if (const json* vnfs = s.raw("vnfs")) {
    if (!vnfs->is_object()) throw ConfigError("workload.vnfs must be an object keyed by VNF name");
    for (const auto& [name, body] : vnfs->items()) {
      const int v = cat.vnf_index(name);
      if (v < 0) throw ConfigError("workload.vnfs: unknown VNF type " + name);
      Section o(&body, "workload.vnfs." + name);
      auto& t = cat.vnfs[v];
      o.get("vcpu", t.vcpu);
      o.get("ram_gb", t.ram_gb);
      o.get("storage_gb", t.storage_gb);
      o.get("proc_ms", t.proc_ms);
      o.finish();
    }
  }
  if (const json* sfcs = s.raw("sfcs")) {
    if (!sfcs->is_object()) throw ConfigError("workload.sfcs must be an object keyed by SFC name");
    for (const auto& [name, body] : sfcs->items()) {
      const int k = cat.sfc_index(name);
      if (k < 0) throw ConfigError("workload.sfcs: unknown SFC type " + name);
      const std::string where = "workload.sfcs." + name;
      Section o(&body, where);
      auto& t = cat.sfcs[k];
      std::vector<std::string> chain;
      o.get("chain", chain);
      if (!chain.empty()) {
        t.chain.clear();
        for (const auto& v : chain) {
          const int idx = cat.vnf_index(v);
          if (idx < 0) throw ConfigError(where + ".chain: unknown VNF type " + v);
          t.chain.push_back(idx);
        }
      }
      std::vector<std::int64_t> bw;
      o.get("bandwidth_kbps", bw);
      if (!bw.empty()) {
        if (bw.size() != 2) throw ConfigError(where + ".bandwidth_kbps must be [min, max]");
        t.bw_min_kbps = bw[0];
        t.bw_max_kbps = bw[1];
      }
      o.get("tolerance_ms", t.tolerance_ms);
      std::vector<int> bundle;
      o.get("bundle", bundle);
      if (!bundle.empty()) {
        if (bundle.size() != 2) throw ConfigError(where + ".bundle must be [min, max]");
        t.bundle_min = bundle[0];
        t.bundle_max = bundle[1];
      }
      o.finish();
    }
  }
  s.finish();
}

void read_drl(Section s, ModelConfig& m) {
  s.get("branch_width", m.branch_width);
  s.get("hidden", m.hidden);
  s.get("learning_rate", m.learning_rate);
  s.get("momentum", m.momentum);
  s.get("gamma", m.gamma);
  s.get("epsilon_start", m.epsilon_start);
  s.get("epsilon_end", m.epsilon_end);
  s.get("epsilon_decay", m.epsilon_decay);
  s.get("replay_capacity", m.replay_capacity);
  s.get("batch_size", m.batch_size);
  s.get("target_sync", m.target_sync);
  s.get("use_target", m.use_target);
  s.finish();
}

void read_sim(Section s, RunConfig& c) {
  auto& o = c.sim;
  s.get("step_ms", o.step_ms);
  s.get("actions_per_step", o.actions_per_step);
  s.get("action_cost_ms", o.action_cost_ms);
  std::string hold = to_key(o.bw_hold);
  s.get("bw_hold", hold);
  if (hold == "per_transfer")
    o.bw_hold = BandwidthHold::PerTransfer;
  else if (hold == "whole_lifetime")
    o.bw_hold = BandwidthHold::WholeLifetime;
  else
    throw ConfigError("sim.bw_hold must be \"per_transfer\" or \"whole_lifetime\"");
  s.get("count_last_mile", o.count_last_mile);
  s.get("eager_drop", o.eager_drop);
  s.get("invalid_blocks_step", o.invalid_blocks_step);
  s.get("idle_ends_step", o.idle_ends_step);
  std::string sel = to_key(o.dc_selection);
  s.get("dc_selection", sel);
  if (sel == "round_robin")
    o.dc_selection = DcSelection::RoundRobin;
  else if (sel == "most_pending")
    o.dc_selection = DcSelection::MostPending;
  else
    throw ConfigError("sim.dc_selection must be \"round_robin\" or \"most_pending\"");
  s.get("max_steps", o.max_steps);
  s.get("episodes", c.eval_episodes);
  s.get("seeds", c.eval_seeds);
  auto r = s.child("rewards");
  r.get("accept", o.rewards.accept);
  r.get("drop", o.rewards.drop);
  r.get("uninstall_needed", o.rewards.uninstall_needed);
  r.get("invalid", o.rewards.invalid);
  r.get("idle", o.rewards.idle);
  r.finish();
  s.finish();
}

void read_train(Section s, TrainConfig& t) {
  s.get("episodes", t.episodes);
  s.get("update_every", t.update_every);
  s.get("updates_per_round", t.updates_per_round);
  s.get("dc_choices", t.dc_choices);
  s.get("scale_min", t.scale_min);
  s.get("scale_max", t.scale_max);
  s.get("area_km", t.area_km);
  s.get("validation_episodes", t.validation_episodes);
  s.get("validation_scale", t.validation_scale);
  s.finish();
}

void read_output(Section s, OutputConfig& o) {
  s.get("directory", o.directory);
  std::vector<std::string> formats;
  const bool given = s.raw("formats") != nullptr;
  s.get("formats", formats);
  if (given) {
    o.csv = o.json = false;
    for (const auto& f : formats) {
      if (f == "csv")
        o.csv = true;
      else if (f == "json")
        o.json = true;
      else
        throw ConfigError("output.formats entries must be \"csv\" or \"json\"");
    }
  }
  s.finish();
}

}  // namespace

void RunConfig::validate() const {
  const auto& t = topology;
  if (t.dcs.empty()) {
    if (t.dc_count < 2) throw ConfigError("topology.dc_count must be at least 2");
    if (!(t.area_km > 0.0)) throw ConfigError("topology.area_km must be positive");
    if (!(t.radius_km > 0.0)) throw ConfigError("topology.radius_km must be positive");
  } else if (t.dcs.size() < 2) {
    throw ConfigError("topology.dcs needs at least two data centers");
  }
  if (t.storage_gb <= 0 || t.vcpu <= 0 || t.ram_gb <= 0)
    throw ConfigError("topology capacities must be positive");
  if (t.link_bandwidth_kbps <= 0) throw ConfigError("topology.link_bandwidth_kbps must be positive");
  if (cluster_limit < 1) throw ConfigError("cluster.size_limit must be at least 1");
  if (clustering.max_iterations < 1) throw ConfigError("cluster.max_iterations must be positive");
  if (!(clustering.tolerance_km >= 0.0)) throw ConfigError("cluster.tolerance_km must be non-negative");
  if (!(scale > 0.0)) throw ConfigError("workload.scale must be positive");
  catalog.validate();
  model.validate();
  sim.validate();
  train.validate();
  if (eval_seeds.empty()) throw ConfigError("sim.seeds must not be empty");
  if (eval_episodes < 1) throw ConfigError("sim.episodes must be at least 1");
  if (sweep.dc_counts.empty() || sweep.cluster_limits.empty() || sweep.scales.empty())
    throw ConfigError("sweep lists must not be empty");
  for (int n : sweep.dc_counts)
    if (n < 2) throw ConfigError("sweep.dc_counts entries must be at least 2");
  for (int l : sweep.cluster_limits)
    if (l < 1) throw ConfigError("sweep.cluster_limits entries must be at least 1");
  for (double x : sweep.scales)
    if (!(x > 0.0)) throw ConfigError("sweep.scales entries must be positive");
  if (output.directory.empty()) throw ConfigError("output.directory must not be empty");
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section top(&root, "config");
  top.get("seed", c.seed);
  read_topology(top.child("topology"), c);
  auto cluster = top.child("cluster");
  cluster.get("size_limit", c.cluster_limit);
  cluster.get("max_iterations", c.clustering.max_iterations);
  cluster.get("tolerance_km", c.clustering.tolerance_km);
  cluster.finish();
  read_workload(top.child("workload"), c);
  read_drl(top.child("drl"), c.model);
  read_sim(top.child("sim"), c);
  read_train(top.child("train"), c.train);
  auto sweep = top.child("sweep");
  sweep.get("dc_counts", c.sweep.dc_counts);
  sweep.get("cluster_limits", c.sweep.cluster_limits);
  sweep.get("scales", c.sweep.scales);
  sweep.finish();
  read_output(top.child("output"), c.output);
  top.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string resolved_config(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;

  const auto& t = c.topology;
  json topo = {{"dc_count", t.dc_count},      {"area_km", t.area_km},
               {"radius_km", t.radius_km},    {"storage_gb", t.storage_gb},
               {"vcpu", t.vcpu},              {"ram_gb", t.ram_gb},
               {"link_bandwidth_kbps", t.link_bandwidth_kbps}};
  if (!t.dcs.empty()) {
    json dcs = json::array();
    for (const auto& d : t.dcs)
      dcs.push_back({{"id", d.id},
                     {"x_km", d.position.x_km},
                     {"y_km", d.position.y_km},
                     {"storage_gb", d.storage_gb},
                     {"vcpu", d.vcpu},
                     {"ram_gb", d.ram_gb}});
    topo["dcs"] = std::move(dcs);
    json links = json::array();
    for (const auto& l : t.links) {
      json e = {{"a", l.a}, {"b", l.b}};
      if (l.bandwidth_kbps) e["bandwidth_kbps"] = *l.bandwidth_kbps;
      if (l.distance_km) e["distance_km"] = *l.distance_km;
      links.push_back(std::move(e));
    }
    topo["links"] = std::move(links);
  }
  j["topology"] = std::move(topo);

  j["cluster"] = {{"size_limit", c.cluster_limit},
                  {"max_iterations", c.clustering.max_iterations},
                  {"tolerance_km", c.clustering.tolerance_km}};

  json vnfs = json::object();
  for (const auto& v : c.catalog.vnfs)
    vnfs[v.name] = {{"vcpu", v.vcpu}, {"ram_gb", v.ram_gb}, {"storage_gb", v.storage_gb},
                    {"proc_ms", v.proc_ms}};
  json sfcs = json::object();
  for (const auto& s : c.catalog.sfcs) {
    json chain = json::array();
    for (int v : s.chain) chain.push_back(c.catalog.vnfs[v].name);
    sfcs[s.name] = {{"chain", std::move(chain)},
                    {"bandwidth_kbps", {s.bw_min_kbps, s.bw_max_kbps}},
                    {"tolerance_ms", s.tolerance_ms},
                    {"bundle", {s.bundle_min, s.bundle_max}}};
  }
  j["workload"] = {{"scale", c.scale}, {"vnfs", std::move(vnfs)}, {"sfcs", std::move(sfcs)}};

  const auto& m = c.model;
  j["drl"] = {{"branch_width", m.branch_width},
              {"hidden", m.hidden},
              {"learning_rate", m.learning_rate},
              {"momentum", m.momentum},
              {"gamma", m.gamma},
              {"epsilon_start", m.epsilon_start},
              {"epsilon_end", m.epsilon_end},
              {"epsilon_decay", m.epsilon_decay},
              {"replay_capacity", m.replay_capacity},
              {"batch_size", m.batch_size},
              {"target_sync", m.target_sync},
              {"use_target", m.use_target}};

  const auto& o = c.sim;
  j["sim"] = {{"step_ms", o.step_ms},
              {"actions_per_step", o.actions_per_step},
              {"action_cost_ms", o.action_cost_ms},
              {"bw_hold", to_key(o.bw_hold)},
              {"count_last_mile", o.count_last_mile},
              {"eager_drop", o.eager_drop},
              {"invalid_blocks_step", o.invalid_blocks_step},
              {"idle_ends_step", o.idle_ends_step},
              {"dc_selection", to_key(o.dc_selection)},
              {"max_steps", o.max_steps},
              {"episodes", c.eval_episodes},
              {"seeds", c.eval_seeds},
              {"rewards",
               {{"accept", o.rewards.accept},
                {"drop", o.rewards.drop},
                {"uninstall_needed", o.rewards.uninstall_needed},
                {"invalid", o.rewards.invalid},
                {"idle", o.rewards.idle}}}};

  const auto& tr = c.train;
  j["train"] = {{"episodes", tr.episodes},
                {"update_every", tr.update_every},
                {"updates_per_round", tr.updates_per_round},
                {"dc_choices", tr.dc_choices},
                {"scale_min", tr.scale_min},
                {"scale_max", tr.scale_max},
                {"area_km", tr.area_km},
                {"validation_episodes", tr.validation_episodes},
                {"validation_scale", tr.validation_scale}};

  j["sweep"] = {{"dc_counts", c.sweep.dc_counts},
                {"cluster_limits", c.sweep.cluster_limits},
                {"scales", c.sweep.scales}};

  json formats = json::array();
  if (c.output.csv) formats.push_back("csv");
  if (c.output.json) formats.push_back("json");
  j["output"] = {{"directory", c.output.directory}, {"formats", std::move(formats)}};
  return j.dump(2) + "\n";
}

}  // namespace sfcsim
