#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cola {

struct Workload;  // workload.hpp

// One microservice deployment: a pool of identical replicas, each serving
// requests at rate mu.
struct ServiceSpec {
  std::string name;
  double mu = 0.0;       // requests/second per replica
  int max_replicas = 1;  // upper end of the replica range
  int min_replicas = 1;
};

// One application operation: the ordered services a request visits (repeats
// allowed) plus a fixed latency for application logic outside the queues.
struct EndpointSpec {
  std::string name;
  std::vector<std::string> path;
  double base_delay_ms = 0.0;
};

struct AppTopology {
  std::vector<ServiceSpec> services;
  std::vector<EndpointSpec> endpoints;

  int service_count() const { return static_cast<int>(services.size()); }
  int endpoint_count() const { return static_cast<int>(endpoints.size()); }

  // Index of a service by name; throws if absent.
  int service_index(const std::string& name) const;
};

// Replica count per service, aligned with AppTopology::services.
struct ClusterState {
  std::vector<int> replicas;

  bool operator==(const ClusterState& other) const = default;
};

enum class CostMode { VmCount, PodCount };

struct CostModel {
  CostMode mode = CostMode::VmCount;
  int pods_per_vm = 1;        // bin-packing divisor, per service
  double cost_per_unit = 15.0;
};

// Throws std::invalid_argument describing the first violated invariant.
void validate_topology(const AppTopology& topo);
void validate_state(const ClusterState& state, const AppTopology& topo);
void validate_cost_model(const CostModel& cm);

// Minimum-replica state for the topology.
ClusterState min_state(const AppTopology& topo);

// VM count for one service under the bin-packing divisor.
int vms_for_service(int replicas, const CostModel& cm);

// Total VM count of a state (PodCount mode still reports packed VMs here;
// the cost itself is pod-based in that mode).
int total_vms(const ClusterState& state, const CostModel& cm);

// Cost of renting the state: unit cost times VM count (per-service ceiling
// packing) or times pod count, depending on mode.
double cluster_cost(const ClusterState& state, const AppTopology& topo,
                    const CostModel& cm);

// Per-service arrival rates induced by a workload: each endpoint contributes
// rps * p_e for every visit its path makes to the service.
std::vector<double> arrival_rates(const Workload& workload,
                                  const AppTopology& topo);

// rho_i = lambda_i / (replicas_i * mu_i). Values above 1 mean overload.
std::vector<double> utilizations(const Workload& workload,
                                 const ClusterState& state,
                                 const AppTopology& topo);

// JSON I/O. Schema:
//   {"services": [{"name", "mu", "max_replicas", "min_replicas"?}, ...],
//    "endpoints": [{"name", "path": [names], "base_delay_ms"?}, ...]}
AppTopology topology_from_json_text(const std::string& text);
AppTopology load_topology(const std::string& path);
std::string topology_to_json_text(const AppTopology& topo);

// {"mode": "vm"|"pod", "pods_per_vm"?, "cost_per_unit"?}
CostModel cost_model_from_json_text(const std::string& text);

}  // namespace cola
