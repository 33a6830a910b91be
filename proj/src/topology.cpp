#include "cola/topology.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cola/workload.hpp"
#include "json.hpp"

namespace cola {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

}  // namespace

int AppTopology::service_index(const std::string& name) const {
  for (std::size_t i = 0; i < services.size(); ++i) {
    if (services[i].name == name) return static_cast<int>(i);
  }
  fail("unknown service name: " + name);
}

void validate_topology(const AppTopology& topo) {
  if (topo.services.empty()) fail("topology has no services");
  std::set<std::string> names;
  for (const auto& s : topo.services) {
    if (s.name.empty()) fail("service with empty name");
    if (!names.insert(s.name).second) fail("duplicate service name: " + s.name);
    if (!(s.mu > 0.0)) fail("service " + s.name + ": mu must be > 0");
    if (s.min_replicas < 1 || s.min_replicas > s.max_replicas)
      fail("service " + s.name + ": need 1 <= min_replicas <= max_replicas");
  }
  std::set<std::string> endpoint_names;
  for (const auto& e : topo.endpoints) {
    if (e.name.empty()) fail("endpoint with empty name");
    if (!endpoint_names.insert(e.name).second)
      fail("duplicate endpoint name: " + e.name);
    if (e.path.empty()) fail("endpoint " + e.name + ": empty path");
    if (e.base_delay_ms < 0.0)
      fail("endpoint " + e.name + ": negative base_delay_ms");
    for (const auto& svc : e.path) {
      if (!names.count(svc))
        fail("endpoint " + e.name + ": unknown service in path: " + svc);
    }
  }
}

void validate_state(const ClusterState& state, const AppTopology& topo) {
  if (state.replicas.size() != topo.services.size())
    fail("cluster state has " + std::to_string(state.replicas.size()) +
         " entries for " + std::to_string(topo.services.size()) + " services");
  for (std::size_t i = 0; i < state.replicas.size(); ++i) {
    const auto& s = topo.services[i];
    int r = state.replicas[i];
    if (r < s.min_replicas || r > s.max_replicas)
      fail("service " + s.name + ": replicas " + std::to_string(r) +
           " outside [" + std::to_string(s.min_replicas) + ", " +
           std::to_string(s.max_replicas) + "]");
  }
}

void validate_cost_model(const CostModel& cm) {
  if (cm.pods_per_vm < 1) fail("pods_per_vm must be >= 1");
  if (!(cm.cost_per_unit > 0.0)) fail("cost_per_unit must be > 0");
}

ClusterState min_state(const AppTopology& topo) {
  ClusterState s;
  s.replicas.reserve(topo.services.size());
  for (const auto& svc : topo.services) s.replicas.push_back(svc.min_replicas);
  return s;
}

int vms_for_service(int replicas, const CostModel& cm) {
  return (replicas + cm.pods_per_vm - 1) / cm.pods_per_vm;
}

int total_vms(const ClusterState& state, const CostModel& cm) {
  int vms = 0;
  for (int r : state.replicas) vms += vms_for_service(r, cm);
  return vms;
}

double cluster_cost(const ClusterState& state, const AppTopology& topo,
                    const CostModel& cm) {
  validate_state(state, topo);
  validate_cost_model(cm);
  if (cm.mode == CostMode::PodCount) {
    long pods = 0;
    for (int r : state.replicas) pods += r;
    return cm.cost_per_unit * static_cast<double>(pods);
  }
  return cm.cost_per_unit * static_cast<double>(total_vms(state, cm));
}

std::vector<double> arrival_rates(const Workload& workload,
                                  const AppTopology& topo) {
  validate_workload(workload, topo.endpoint_count());
  std::vector<double> rates(topo.services.size(), 0.0);
  if (workload.total_rps <= 0.0) return rates;
  for (std::size_t e = 0; e < topo.endpoints.size(); ++e) {
    double endpoint_rate = workload.total_rps * workload.endpoint_probs[e];
    if (endpoint_rate == 0.0) continue;
    for (const auto& svc : topo.endpoints[e].path) {
      rates[topo.service_index(svc)] += endpoint_rate;
    }
  }
  return rates;
}

std::vector<double> utilizations(const Workload& workload,
                                 const ClusterState& state,
                                 const AppTopology& topo) {
  validate_state(state, topo);
  auto rates = arrival_rates(workload, topo);
  std::vector<double> rho(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    rho[i] = rates[i] / (state.replicas[i] * topo.services[i].mu);
  }
  return rho;
}

AppTopology topology_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  AppTopology topo;
  for (const auto& js : j.at("services")) {
    ServiceSpec s;
    s.name = js.at("name").get<std::string>();
    s.mu = js.at("mu").get<double>();
    s.max_replicas = js.at("max_replicas").get<int>();
    s.min_replicas = js.value("min_replicas", 1);
    topo.services.push_back(std::move(s));
  }
  for (const auto& je : j.value("endpoints", nlohmann::json::array())) {
    EndpointSpec e;
    e.name = je.at("name").get<std::string>();
    e.path = je.at("path").get<std::vector<std::string>>();
    e.base_delay_ms = je.value("base_delay_ms", 0.0);
    topo.endpoints.push_back(std::move(e));
  }
  validate_topology(topo);
  return topo;
}

AppTopology load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open topology file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return topology_from_json_text(ss.str());
  } catch (const std::exception& ex) {
    fail(path + ": " + ex.what());
  }
}

std::string topology_to_json_text(const AppTopology& topo) {
  nlohmann::json j;
  j["services"] = nlohmann::json::array();
  for (const auto& s : topo.services) {
    j["services"].push_back({{"name", s.name},
                             {"mu", s.mu},
                             {"max_replicas", s.max_replicas},
                             {"min_replicas", s.min_replicas}});
  }
  j["endpoints"] = nlohmann::json::array();
  for (const auto& e : topo.endpoints) {
    j["endpoints"].push_back({{"name", e.name},
                              {"path", e.path},
                              {"base_delay_ms", e.base_delay_ms}});
  }
  return j.dump(2);
}

CostModel cost_model_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  CostModel cm;
  std::string mode = j.value("mode", "vm");
  if (mode == "vm") {
    cm.mode = CostMode::VmCount;
  } else if (mode == "pod") {
    cm.mode = CostMode::PodCount;
  } else {
    fail("cost model mode must be \"vm\" or \"pod\", got: " + mode);
  }
  cm.pods_per_vm = j.value("pods_per_vm", 1);
  cm.cost_per_unit = j.value("cost_per_unit", 15.0);
  validate_cost_model(cm);
  return cm;
}

}  // namespace cola
