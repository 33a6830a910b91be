#pragma once

// Small topologies shared across the test suites.

#include "cola/topology.hpp"
#include "cola/workload.hpp"

namespace fixtures {

inline cola::AppTopology single_service(double mu = 100.0,
                                        int max_replicas = 30,
                                        double base_delay_ms = 0.0) {
  cola::AppTopology topo;
  topo.services.push_back({"svc", mu, max_replicas, 1});
  topo.endpoints.push_back({"op", {"svc"}, base_delay_ms});
  return topo;
}

inline cola::AppTopology two_service() {
  cola::AppTopology topo;
  topo.services.push_back({"a", 100.0, 20, 1});
  topo.services.push_back({"b", 200.0, 20, 1});
  topo.endpoints.push_back({"e1", {"a"}, 0.0});
  topo.endpoints.push_back({"e2", {"a", "b"}, 0.0});
  return topo;
}

inline cola::Workload single_workload(double rps) {
  return cola::Workload{rps, {1.0}};
}

}  // namespace fixtures
