#include "cola/queueing.hpp"

#include <cmath>
#include <string>

#include "cola/topology.hpp"
#include "cola/workload.hpp"

namespace cola {

namespace {

void require_stable(const MmcQueue& q) {
  if (q.c < 1) throw std::invalid_argument("MmcQueue: c must be >= 1");
  if (q.lambda < 0.0) throw std::invalid_argument("MmcQueue: negative lambda");
  if (!(q.mu > 0.0)) throw std::invalid_argument("MmcQueue: mu must be > 0");
  if (q.rho() >= 1.0)
    throw UnstableQueueError("M/M/c queue unstable: rho = " +
                             std::to_string(q.rho()));
}

}  // namespace

double erlang_c(const MmcQueue& q) {
  require_stable(q);
  if (q.lambda == 0.0) return 0.0;
  double offered = q.lambda / q.mu;  // c * rho
  // Erlang-B recurrence: B(0) = 1, B(k) = a B(k-1) / (k + a B(k-1)).
  double b = 1.0;
  for (int k = 1; k <= q.c; ++k) b = offered * b / (k + offered * b);
  double rho = q.rho();
  double c_prob = b / (1.0 - rho * (1.0 - b));
  return std::min(std::max(c_prob, 0.0), 1.0);
}

double wq(const MmcQueue& q) {
  require_stable(q);
  if (q.lambda == 0.0) return 0.0;
  return erlang_c(q) / (q.c * q.mu - q.lambda);
}

double lq(const MmcQueue& q) { return wq(q) * q.lambda; }

double prop1_bound(int c, double rho) {
  if (c < 1) throw std::invalid_argument("prop1_bound: c must be >= 1");
  if (rho < 0.0 || rho >= 1.0)
    throw std::domain_error("prop1_bound: rho must be in [0, 1)");
  double one_minus = 1.0 - rho;
  double bracket = rho * rho * c / (c + 1.0) + 1.0 / (one_minus * one_minus) +
                   rho * one_minus / (one_minus * one_minus);
  return bracket * rho / (c + 1.0);
}

double prop2_ratio(double lambda_l, double lambda_u) {
  if (!(lambda_l > 0.0) || !(lambda_u > 0.0))
    throw std::domain_error("prop2_ratio: rates must be > 0");
  if (lambda_l > lambda_u)
    throw std::domain_error("prop2_ratio: lambda_l > lambda_u");
  return lambda_u / lambda_l;
}

std::optional<double> analytic_mean_latency(const Workload& workload,
                                            const ClusterState& state,
                                            const AppTopology& topo) {
  validate_state(state, topo);
  auto rates = arrival_rates(workload, topo);

  // Per-service sojourn (wait + service) in seconds; computed once, reused
  // across endpoint paths.
  std::vector<double> sojourn_s(rates.size(), 0.0);
  std::vector<bool> visited(rates.size(), false);
  for (std::size_t e = 0; e < topo.endpoints.size(); ++e) {
    if (workload.total_rps > 0.0 && workload.endpoint_probs[e] == 0.0) continue;
    for (const auto& name : topo.endpoints[e].path)
      visited[topo.service_index(name)] = true;
  }
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!visited[i]) continue;
    MmcQueue q{state.replicas[i], rates[i], topo.services[i].mu};
    if (q.rho() >= 1.0) return std::nullopt;
    sojourn_s[i] = wq(q) + 1.0 / q.mu;
  }

  // Idle workload with no distribution attached: nothing to average over.
  if (workload.total_rps == 0.0 &&
      workload.endpoint_probs.size() != topo.endpoints.size())
    return 0.0;

  double mean_ms = 0.0;
  for (std::size_t e = 0; e < topo.endpoints.size(); ++e) {
    double p = workload.endpoint_probs[e];
    if (p == 0.0) continue;
    double latency_s = 0.0;
    for (const auto& name : topo.endpoints[e].path)
      latency_s += sojourn_s[topo.service_index(name)];
    mean_ms += p * (topo.endpoints[e].base_delay_ms + latency_s * 1000.0);
  }
  return mean_ms;
}

}  // namespace cola
