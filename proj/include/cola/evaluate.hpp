#pragma once

#include <cstdint>
#include <memory>

#include "cola/simulator.hpp"
#include "cola/topology.hpp"
#include "cola/workload.hpp"

namespace cola {

// One "apply the workload and observe" primitive. The trainer, the oracle,
// and the controller all consume this interface; the DES implementation is
// the real thing and the analytic one is a fast surrogate for experiments
// where sampling noise is not the point.
class ClusterEvaluator {
 public:
  virtual ~ClusterEvaluator() = default;

  // Observes one sample window of the workload on the given state.
  virtual SimReport sample(const Workload& workload,
                           const ClusterState& state) = 0;

  // Per-service utilization rise caused by the workload (the congestion
  // signal for service selection). Saturates at 1 like kubelet CPU metrics.
  virtual std::vector<double> utilization_delta(const Workload& workload,
                                                const ClusterState& state) = 0;

  // Sample windows consumed so far, utilization probes included.
  std::uint64_t samples_taken() const { return samples_; }
  double window_duration_s() const { return duration_s_; }
  double timeout_ms() const { return timeout_ms_; }

 protected:
  std::uint64_t samples_ = 0;
  double duration_s_ = 0.0;
  double timeout_ms_ = 2000.0;
};

// Runs the discrete-event simulator, one fresh seed substream per window so
// repeated observations of the same state see independent noise while the
// whole sequence stays reproducible from the master seed.
class DesEvaluator : public ClusterEvaluator {
 public:
  DesEvaluator(const AppTopology& topo, const CostModel& cm,
               const SimConfig& cfg, std::uint64_t master_seed);

  SimReport sample(const Workload& workload, const ClusterState& state) override;
  std::vector<double> utilization_delta(const Workload& workload,
                                        const ClusterState& state) override;

 private:
  const AppTopology& topo_;
  CostModel cm_;
  SimConfig cfg_;
  std::uint64_t master_seed_;
  std::uint64_t counter_ = 0;
};

// Evaluates latency with the closed-form queueing composition instead of a
// simulation run. No steady state (rho >= 1 anywhere on a used path) reports
// the timeout, mirroring what the DES converges to. Optional Gaussian noise
// reintroduces measurement error when wanted.
class AnalyticEvaluator : public ClusterEvaluator {
 public:
  AnalyticEvaluator(const AppTopology& topo, const CostModel& cm,
                    const SimConfig& cfg, std::uint64_t master_seed);

  SimReport sample(const Workload& workload, const ClusterState& state) override;
  std::vector<double> utilization_delta(const Workload& workload,
                                        const ClusterState& state) override;

 private:
  const AppTopology& topo_;
  CostModel cm_;
  SimConfig cfg_;
  std::uint64_t master_seed_;
  std::uint64_t counter_ = 0;
};

enum class EvaluatorKind { Des, Analytic };

std::unique_ptr<ClusterEvaluator> make_evaluator(EvaluatorKind kind,
                                                 const AppTopology& topo,
                                                 const CostModel& cm,
                                                 const SimConfig& cfg,
                                                 std::uint64_t master_seed);

}  // namespace cola
