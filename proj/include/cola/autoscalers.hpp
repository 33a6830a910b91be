#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cola/simulator.hpp"
#include "cola/topology.hpp"
#include "cola/workload.hpp"

namespace cola {

enum class Objective { Median, Mean, P90 };

Objective objective_from_string(const std::string& s);
std::string to_string(Objective o);

// Latency the objective cares about, pulled out of a report.
double objective_latency(const SimReport& report, Objective o);

struct RewardParams {
  double l_target_ms = 50.0;
  double lambda_weight = 1.0 / 3.0;  // per-ms penalty above target
  Objective objective = Objective::Median;
  CostModel cost_model;
};

// lambda * min(l_target - l_obs, 0) - cluster_cost(state). Always <= 0; equals
// -cost when the target is met. Callers map an overloaded/no-steady-state
// observation to the timeout before calling.
double reward(const RewardParams& p, double l_obs_ms, const ClusterState& state,
              const AppTopology& topo);

struct HpaConfig {
  double threshold = 0.5;  // target utilization T in (0, 1]
  double period_s = 15.0;
  std::vector<double> per_service_thresholds;  // optional, overrides threshold
};

void validate_hpa(const HpaConfig& cfg);

// One control-loop tick: per service, ceil(R * M / T) clamped to the replica
// range.
ClusterState hpa_step(const HpaConfig& cfg, const ClusterState& current,
                      const std::vector<double>& measured_util,
                      const AppTopology& topo);

// Evaluation trace shared by the control-loop runners: per-segment reports
// plus the timeline of states the loop moved through.
struct EvalTrace {
  struct SegmentResult {
    Workload workload;
    double duration_s = 0.0;
    SimReport report;
  };
  struct StateChange {
    double at_s = 0.0;
    ClusterState state;
    bool fallback_active = false;
  };
  std::vector<SegmentResult> segments;
  std::vector<StateChange> state_history;

  // Time-averaged cluster cost recomputed from the state history.
  double time_averaged_cost(const AppTopology& topo, const CostModel& cm,
                            double total_duration_s) const;
};

// Runs the utilization-threshold control loop over a schedule. Each period
// is simulated with the current state; the measured busy fraction (clamped
// to [0,1], as kubelet CPU metrics cannot exceed requests) feeds hpa_step.
EvalTrace run_hpa(const HpaConfig& cfg, const WorkloadSchedule& schedule,
                  const AppTopology& topo, const CostModel& cm,
                  const SimConfig& sim_cfg,
                  std::optional<ClusterState> start = std::nullopt);

// OLS reward model over features [replicas_i..., rps/replicas_i..., rps, 1].
struct LinRegModel {
  std::vector<double> coefficients;  // length 2D + 2, intercept last
  std::uint64_t sample_count = 0;
  bool ridge_fallback = false;  // rank-deficient fit was regularized

  std::vector<std::string> feature_names(const AppTopology& topo) const;
};

struct LrSample {
  Workload workload;
  ClusterState state;
  double reward = 0.0;
};

LinRegModel lr_train(const std::vector<LrSample>& samples,
                     const AppTopology& topo);

double lr_predict(const LinRegModel& model, const Workload& workload,
                  const ClusterState& state);

// Samples n_candidates states uniformly per coordinate and returns the one
// with the highest predicted reward; exact ties go to the cheaper state, then
// the lexicographically smallest.
ClusterState lr_infer(const LinRegModel& model, const Workload& workload,
                      const AppTopology& topo, const CostModel& cm,
                      int n_candidates = 20000, std::uint64_t seed = 0);

// JSON round trip for model reuse across harness invocations.
std::string lr_model_to_json_text(const LinRegModel& model,
                                  const AppTopology& topo);
LinRegModel lr_model_from_json_text(const std::string& text);

}  // namespace cola
