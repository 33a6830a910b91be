#include "cola/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "cola/queueing.hpp"
#include "cola/rng.hpp"

namespace cola {

DesEvaluator::DesEvaluator(const AppTopology& topo, const CostModel& cm,
                           const SimConfig& cfg, std::uint64_t master_seed)
    : topo_(topo), cm_(cm), cfg_(cfg), master_seed_(master_seed) {
  duration_s_ = cfg.duration_s;
  timeout_ms_ = cfg.timeout_ms;
}

SimReport DesEvaluator::sample(const Workload& workload,
                               const ClusterState& state) {
  SimConfig cfg = cfg_;
  cfg.seed = mix_seed(master_seed_, counter_++);
  ++samples_;
  return simulate(workload, state, topo_, cm_, cfg);
}

std::vector<double> DesEvaluator::utilization_delta(const Workload& workload,
                                                    const ClusterState& state) {
  SimConfig cfg = cfg_;
  cfg.seed = mix_seed(master_seed_, counter_++);
  ++samples_;
  return measure_utilization_delta(workload, state, topo_, cm_, cfg);
}

AnalyticEvaluator::AnalyticEvaluator(const AppTopology& topo,
                                     const CostModel& cm, const SimConfig& cfg,
                                     std::uint64_t master_seed)
    : topo_(topo), cm_(cm), cfg_(cfg), master_seed_(master_seed) {
  duration_s_ = cfg.duration_s;
  timeout_ms_ = cfg.timeout_ms;
}

SimReport AnalyticEvaluator::sample(const Workload& workload,
                                    const ClusterState& state) {
  std::uint64_t stream = counter_++;
  ++samples_;

  SimReport report;
  auto latency = analytic_mean_latency(workload, state, topo_);
  double value = latency ? std::min(*latency, cfg_.timeout_ms) : cfg_.timeout_ms;
  if (cfg_.noise_sd_ms > 0.0) {
    Rng rng(mix_seed(master_seed_, stream));
    value = std::clamp(value + rng.normal(0.0, cfg_.noise_sd_ms), 0.0,
                       cfg_.timeout_ms);
  }
  report.median_ms = report.p90_ms = report.mean_ms = value;
  if (!latency) report.failures_per_s = workload.total_rps;
  report.cost_units = cluster_cost(state, topo_, cm_);
  report.mean_utilization = utilizations(workload, state, topo_);
  for (double& u : report.mean_utilization) u = std::min(u, 1.0);
  return report;
}

std::vector<double> AnalyticEvaluator::utilization_delta(
    const Workload& workload, const ClusterState& state) {
  ++samples_;
  ++counter_;
  auto rho = utilizations(workload, state, topo_);
  for (double& u : rho) u = std::min(u, 1.0);
  return rho;
}

std::unique_ptr<ClusterEvaluator> make_evaluator(EvaluatorKind kind,
                                                 const AppTopology& topo,
                                                 const CostModel& cm,
                                                 const SimConfig& cfg,
                                                 std::uint64_t master_seed) {
  if (kind == EvaluatorKind::Analytic)
    return std::make_unique<AnalyticEvaluator>(topo, cm, cfg, master_seed);
  return std::make_unique<DesEvaluator>(topo, cm, cfg, master_seed);
}

}  // namespace cola
