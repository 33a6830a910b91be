#pragma once

#include <optional>
#include <stdexcept>

namespace cola {

struct AppTopology;
struct ClusterState;
struct Workload;

// Thrown by steady-state formulas when rho >= 1.
class UnstableQueueError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// c identical servers draining one FCFS queue of Poisson arrivals.
struct MmcQueue {
  int c = 1;
  double lambda = 0.0;  // arrival rate
  double mu = 1.0;      // per-server service rate

  double rho() const { return lambda / (c * mu); }
};

// Probability an arrival has to wait (all servers busy). Evaluated through
// the Erlang-B recurrence rather than raw factorials so large c stays finite.
double erlang_c(const MmcQueue& q);

// Mean time spent waiting in queue: erlang_c / (c*mu - lambda).
// Mean response time is wq + 1/mu.
double wq(const MmcQueue& q);

// Mean number waiting in queue: wq * lambda.
double lq(const MmcQueue& q);

// Upper bound on the queue-length reduction from adding one server at
// utilization rho:
//   [rho^2 c/(c+1) + 1/(1-rho)^2 + rho(1-rho)/(1-rho)^2] * rho/(c+1).
// Increasing in rho for fixed c, which is what makes scaling the most
// utilized queue the best-bounded move.
double prop1_bound(int c, double rho);

// Worst-case multiplicative queueing-delay inflation when a policy
// interpolates between states trained at rates lambda_l <= lambda_u.
double prop2_ratio(double lambda_l, double lambda_u);

// Mean end-to-end latency of a workload on a cluster state, in ms: for each
// endpoint, base_delay plus (wq + 1/mu) for every service visit on its path,
// averaged by endpoint probability. nullopt means some visited service has
// rho >= 1 (no steady state); callers map that to the timeout regime.
std::optional<double> analytic_mean_latency(const Workload& workload,
                                            const ClusterState& state,
                                            const AppTopology& topo);

}  // namespace cola
