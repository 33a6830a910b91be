#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cola/autoscalers.hpp"
#include "cola/evaluate.hpp"
#include "cola/topology.hpp"
#include "cola/workload.hpp"

namespace cola {

struct TrainerConfig {
  double lambda_initial = 1.0 / 3.0;
  double lambda_max = 20.0;
  // Bandit count prior; also sets the default weight increment 1/epsilon.
  double epsilon = 1.0;
  // Override for the lambda increment when the Alg-1 coupling to epsilon is
  // not wanted. Unset means 1/epsilon.
  std::optional<double> lambda_increment;
  int t_iters = 20;        // selection-optimization iterations per lambda
  int f_trials = 10;       // bandit trial budget per ucb call
  int arm_window = 2;      // candidate replicas within +-window of current
  // Literal pseudocode index sqrt(2 log t)/N_a; true switches to the textbook
  // sqrt(2 log t / N_a) for comparison runs.
  bool textbook_ucb_index = false;

  double lambda_step() const {
    return lambda_increment.value_or(1.0 / epsilon);
  }
};

void validate_trainer(const TrainerConfig& cfg);

// Most congested service: argmax of the utilization rise, ties to the lowest
// index (documented convention for simultaneous saturation).
int select_service(const std::vector<double>& util_delta);

// Candidate replica counts {cur-w, ..., cur+w} clamped to the service's
// replica range, ascending.
std::vector<int> arm_set(const ClusterState& state, int service,
                         const TrainerConfig& cfg, const AppTopology& topo);

struct UcbResult {
  int best_replicas = 0;
  double mean_latency_ms = 0.0;  // running mean latency of the winning arm
  std::vector<int> arms;
  std::vector<int> trial_counts;     // per arm, priors excluded
  std::vector<double> mean_rewards;  // final R_a per arm
};

// The bandit core over an opaque arm evaluator: arm -> (reward, latency).
// Kept separate so tests can inject deterministic rewards; production wraps
// a simulation sample plus the reward function around it.
UcbResult ucb_core(const std::vector<int>& arms, int f_trials, double epsilon,
                   bool textbook_index,
                   const std::function<std::pair<double, double>(int)>& play);

// UCB1 pass over the arm set for one service: each trial sets the service's
// replica count to the chosen arm, observes one sample window, and scores it
// with reward(). Returns the arm with the highest final mean reward and that
// arm's mean observed latency.
UcbResult ucb(const std::vector<int>& arms, const Workload& workload,
              double lambda_weight, const ClusterState& state, int service,
              const TrainerConfig& cfg, const RewardParams& rp,
              ClusterEvaluator& eval, const AppTopology& topo);

struct OptimizeResult {
  ClusterState state;
  double achieved_latency_ms = 0.0;
  bool target_met = false;
  double final_lambda = 0.0;
  std::vector<double> lambdas_used;  // strictly increasing by lambda_step
  std::uint64_t samples = 0;         // sample windows consumed
  double cost_unit_seconds = 0.0;    // integral of cluster cost over sampling
  std::vector<double> cost_history;  // cost after each adopted move
  bool timeout_regime = false;       // final latency pinned at the timeout
};

// Alg-1 outer loop: repeat (select congested service, bandit-optimize its
// replica count) up to t_iters times, escalating lambda by lambda_step after
// each failed pass until the target is met or lambda_max is exhausted.
OptimizeResult optimize_cluster(const Workload& workload,
                                const ClusterState& start,
                                const TrainerConfig& cfg,
                                const RewardParams& rp, ClusterEvaluator& eval,
                                const AppTopology& topo);

struct PolicyEntry {
  int dist_index = 0;
  double rps = 0.0;
  ClusterState state;
  double achieved_latency_ms = 0.0;
  std::uint64_t samples = 0;
  bool target_met = false;
  double final_lambda = 0.0;
  double cost_unit_seconds = 0.0;
};

struct TrainedPolicy {
  WorkloadGrid grid;
  RewardParams reward_params;
  std::vector<PolicyEntry> entries;

  const PolicyEntry* find(int dist_index, double rps) const;
  std::vector<const PolicyEntry*> entries_for(int dist_index) const;
  std::uint64_t total_samples() const;
};

// Maps each grid point to a cluster state. Within one distribution, RPS
// points are trained in ascending order and each search warm-starts from the
// previous point's solution; the first point starts from warm_start(workload)
// when provided, else the minimum-replica state.
TrainedPolicy train(
    const WorkloadGrid& grid, const TrainerConfig& cfg, const RewardParams& rp,
    ClusterEvaluator& eval, const AppTopology& topo,
    const std::function<ClusterState(const Workload&)>& warm_start = nullptr);

// Policy file round trip:
//   {"grid", "reward_params", "entries": [{"dist_index", "rps", "replicas",
//    "achieved_latency_ms", "samples", ...}]}
std::string policy_to_json_text(const TrainedPolicy& policy);
TrainedPolicy policy_from_json_text(const std::string& text);
TrainedPolicy load_policy(const std::string& path);
void save_policy(const TrainedPolicy& policy, const std::string& path);

struct ControllerConfig {
  double metrics_period_s = 60.0;
  double actuation_lag_s = 75.0;
  double fallback_threshold = 0.30;  // fractional overshoot of the grid upper
  HpaConfig fallback_hpa{0.5, 15.0, {}};
};

void validate_controller(const ControllerConfig& cfg);

// Fractional state for an observed RPS within the trained range: linear
// interpolation between the bracketing grid points (inverse-distance weights,
// exact at grid points). nullopt when outside [grid lower, grid upper].
std::optional<std::vector<double>> interpolate_rps(const TrainedPolicy& policy,
                                                   int dist_index,
                                                   double observed_rps);

// Fractional state for an arbitrary observed workload: every trained
// distribution contributes its RPS-interpolated state, weighted by inverse
// Euclidean distance between distribution vectors. An exact distribution
// match wins outright.
std::optional<std::vector<double>> interpolate_distribution(
    const TrainedPolicy& policy, const Workload& observed);

// Conservative materialization: per-coordinate ceiling, clamped to range.
ClusterState materialize(const std::vector<double>& fractional,
                         const AppTopology& topo);

struct ScalingAction {
  enum class Kind { AddVms, ScalePods, RemoveVms };
  Kind kind;
  int vm_delta = 0;           // VM count change (Add/Remove only)
  ClusterState target;        // pod target (ScalePods only)
  double effective_after_s = 0.0;
};

struct ScalingPlan {
  bool fallback = false;  // delegate to the fallback HPA
  std::optional<ClusterState> target;
  std::vector<ScalingAction> actions;
};

// One controller decision: fall back to the HPA when the observed rate
// overshoots the trained range by more than fallback_threshold; otherwise
// produce the interpolated target with scale-up ordered VMs-then-pods and
// scale-down ordered pods-then-VMs.
ScalingPlan controller_step(const ControllerConfig& cfg,
                            const TrainedPolicy& policy,
                            const Workload& observed,
                            const ClusterState& current,
                            const AppTopology& topo, const CostModel& cm);

// Online evaluation loop: each metrics period observes the previous window's
// workload, plans, and applies the plan after the actuation lag. Fallback
// windows run the 15 s HPA loop instead of the policy.
EvalTrace run_controller(const ControllerConfig& cfg,
                         const TrainedPolicy& policy,
                         const WorkloadSchedule& schedule,
                         const AppTopology& topo, const CostModel& cm,
                         const SimConfig& sim_cfg,
                         std::optional<ClusterState> start = std::nullopt);

}  // namespace cola
