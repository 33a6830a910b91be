#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cola/cola.hpp"

namespace cola {

// Policies the harness can run head to head.
struct PolicySpec {
  enum class Kind { Cola, CpuThreshold, LinReg, Oracle };
  Kind kind = Kind::Cola;
  double threshold = 0.5;  // CpuThreshold only
  std::string name;        // CSV label, e.g. "cola", "cpu-30", "lr", "oracle"
};

// Accepts "cola", "cpu:<T>" (percent or fraction), "lr", "oracle".
PolicySpec parse_policy(const std::string& text);

struct ExperimentSpec {
  AppTopology topology;
  WorkloadSchedule schedule;
  std::vector<PolicySpec> policies;
  SimConfig sim;
  CostModel cost_model;
  RewardParams reward_params;
  WorkloadGrid grid;  // training grid for cola/lr when no policy file is given
  TrainerConfig trainer;
  ControllerConfig controller;
  EvaluatorKind training_evaluator = EvaluatorKind::Des;
  std::uint64_t master_seed = 0;
  std::string out_csv;                    // empty: no file written
  std::string cache_dir;                  // empty: no policy caching
  std::optional<std::string> policy_file; // pre-trained policy for cola
  int lr_training_samples = 200;
  int lr_candidates = 20000;
};

struct ResultRow {
  double users = 0.0;  // segment request rate
  std::string policy;
  double median_ms = 0.0;
  double p90_ms = 0.0;
  double failures_per_s = 0.0;
  double cost_units = 0.0;  // time-averaged over the segment
  std::uint64_t samples = 0;  // training samples behind the policy
};

// Evaluates every requested policy on every schedule segment under paired
// arrival seeds, training (and caching) policies as needed. Rows are ordered
// by (policy as listed, segment). Writes out_csv when set.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

// Exact CSV bytes for a result set, header included.
std::string results_to_csv(const std::vector<ResultRow>& rows);

// Simulates every cluster state and ranks by reward (ties: cheaper state
// first, then lexicographic). Throws when the state space exceeds the cap.
std::vector<std::pair<ClusterState, double>> exhaustive_oracle(
    const Workload& workload, const AppTopology& topo, const CostModel& cm,
    const RewardParams& rp, const SimConfig& sim_cfg,
    EvaluatorKind kind = EvaluatorKind::Des, std::uint64_t seed = 0,
    std::uint64_t state_cap = 100000);

std::uint64_t state_space_size(const AppTopology& topo);

struct TrainingCostReport {
  std::uint64_t total_samples = 0;
  double simulated_time_s = 0.0;
  double cost_unit_hours = 0.0;
};

TrainingCostReport training_cost_report(const TrainedPolicy& policy,
                                        const SimConfig& sim_cfg);

// Simulated hours of deployment needed before the training spend is paid
// back by the cheaper policy. nullopt means never (no savings).
std::optional<double> amortization_hours(const TrainingCostReport& report,
                                         double baseline_cost_rate,
                                         double cola_cost_rate);

// Bundled desk-scale topologies: "sws", "bookinfo4", "boutique11". These are
// synthetic fixtures shaped like the well-known demo apps, not calibrated
// measurements of them.
std::optional<AppTopology> builtin_topology(const std::string& name);

// Builtin name or a JSON file path.
AppTopology resolve_topology(const std::string& name_or_path);

}  // namespace cola
