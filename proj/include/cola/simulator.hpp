#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cola/topology.hpp"
#include "cola/workload.hpp"

namespace cola {

struct SimConfig {
  double duration_s = 30.0;    // measured sample window
  double timeout_ms = 2000.0;  // client-side timeout
  std::uint64_t seed = 0;
  double warmup_s = -1.0;      // < 0 means 10% of duration
  double noise_sd_ms = 0.0;    // additive Gaussian noise on reported percentiles

  double effective_warmup_s() const {
    return warmup_s < 0.0 ? 0.1 * duration_s : warmup_s;
  }
};

struct SimReport {
  double median_ms = 0.0;
  double p90_ms = 0.0;
  double mean_ms = 0.0;
  double failures_per_s = 0.0;  // requests that hit the timeout
  std::vector<double> mean_utilization;  // time-averaged busy fraction per service
  std::uint64_t completed_requests = 0;  // finished under the timeout
  double cost_units = 0.0;               // cluster_cost of the simulated state

  // Conservation bookkeeping over the full run (warmup included).
  std::uint64_t total_arrivals = 0;
  std::uint64_t timed_out_requests = 0;
  std::uint64_t in_flight_at_horizon = 0;

  bool operator==(const SimReport& other) const = default;
};

// Runs one sample window: open-loop Poisson arrivals at total_rps, endpoint
// drawn i.i.d. from the distribution, each request walking its path through
// FCFS multi-server queues with exponential service at rate mu per replica.
// Request latency is base_delay plus the summed sojourns; anything over
// timeout_ms records the timeout value and counts as a failure. Deterministic
// for a fixed seed. When latency_sink is given, every measured latency sample
// (timeout-clamped) is appended to it, which lets callers pool windows.
SimReport simulate(const Workload& workload, const ClusterState& state,
                   const AppTopology& topo, const CostModel& cm,
                   const SimConfig& cfg,
                   std::vector<double>* latency_sink = nullptr);

// Utilization rise attributable to the workload: measured busy fraction with
// (background + workload) applied minus the busy fraction with background
// alone. With no background the idle side is all zeros and the delta is just
// the measured utilization.
std::vector<double> measure_utilization_delta(
    const Workload& workload, const ClusterState& state,
    const AppTopology& topo, const CostModel& cm, const SimConfig& cfg,
    const std::optional<Workload>& background = std::nullopt);

// Nearest-rank percentile: 1-based index ceil(q*n), clamped to [1, n].
double percentile(std::vector<double> samples, double q);

// Assembles percentile/mean fields of a report from pooled samples; used by
// the control-loop runners when stitching windows into one segment report.
struct WindowAccumulator {
  std::vector<double> samples;
  double total_time_s = 0.0;
  double failures = 0.0;
  std::uint64_t completed = 0;
  std::vector<double> util_time_weighted;  // sum of util_i * window length
  double cost_time_weighted = 0.0;

  void add(const SimReport& report, const std::vector<double>& window_samples,
           double window_s);
  SimReport finalize(double timeout_ms) const;
};

}  // namespace cola
