#include "cola/cola.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cola/rng.hpp"
#include "json.hpp"

namespace cola {

namespace {

constexpr double kEps = 1e-9;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

}  // namespace

void validate_trainer(const TrainerConfig& cfg) {
  if (!(cfg.lambda_initial > 0.0)) fail("trainer: lambda_initial must be > 0");
  if (cfg.lambda_initial > cfg.lambda_max)
    fail("trainer: lambda_initial > lambda_max");
  if (!(cfg.epsilon > 0.0)) fail("trainer: epsilon must be > 0");
  if (!(cfg.lambda_step() > 0.0)) fail("trainer: lambda step must be > 0");
  if (cfg.t_iters < 1) fail("trainer: t_iters must be >= 1");
  if (cfg.f_trials < 1) fail("trainer: f_trials must be >= 1");
  if (cfg.arm_window < 0) fail("trainer: arm_window must be >= 0");
  // UCB1 only explores every action when trials cover the arms.
  if (cfg.f_trials < 2 * cfg.arm_window + 1)
    fail("trainer: f_trials must cover the arm window (need >= " +
         std::to_string(2 * cfg.arm_window + 1) + ")");
}

int select_service(const std::vector<double>& util_delta) {
  if (util_delta.empty()) fail("select_service: empty utilization vector");
  int best = 0;
  for (int i = 1; i < static_cast<int>(util_delta.size()); ++i) {
    if (util_delta[i] > util_delta[best]) best = i;
  }
  return best;
}

std::vector<int> arm_set(const ClusterState& state, int service,
                         const TrainerConfig& cfg, const AppTopology& topo) {
  validate_state(state, topo);
  if (service < 0 || service >= topo.service_count())
    fail("arm_set: service index out of range");
  const auto& svc = topo.services[service];
  int cur = state.replicas[service];
  int lo = std::max(svc.min_replicas, cur - cfg.arm_window);
  int hi = std::min(svc.max_replicas, cur + cfg.arm_window);
  std::vector<int> arms;
  for (int r = lo; r <= hi; ++r) arms.push_back(r);
  return arms;
}

UcbResult ucb_core(const std::vector<int>& arms, int f_trials, double epsilon,
                   bool textbook_index,
                   const std::function<std::pair<double, double>(int)>& play) {
  if (arms.empty()) fail("ucb: empty arm set");
  const std::size_t n = arms.size();
  std::vector<double> counts(n, epsilon);  // N_a starts at the count prior
  std::vector<double> mean_reward(n, 0.0);
  std::vector<double> mean_latency(n, 0.0);
  std::vector<int> trials(n, 0);

  for (int t = 1; t <= f_trials; ++t) {
    double log_term = std::sqrt(2.0 * std::log(static_cast<double>(t)));
    std::size_t pick = 0;
    double best_index = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n; ++a) {
      double bonus = textbook_index
                         ? std::sqrt(2.0 * std::log(static_cast<double>(t)) /
                                     counts[a])
                         : log_term / counts[a];
      double index = mean_reward[a] + bonus;
      if (index > best_index) {  // ties keep the smaller replica count
        best_index = index;
        pick = a;
      }
    }
    auto [reward_value, latency_ms] = play(arms[pick]);
    counts[pick] += 1.0;
    ++trials[pick];
    mean_reward[pick] += (reward_value - mean_reward[pick]) / counts[pick];
    mean_latency[pick] += (latency_ms - mean_latency[pick]) / counts[pick];
  }

  std::size_t best = 0;
  for (std::size_t a = 1; a < n; ++a) {
    if (mean_reward[a] > mean_reward[best]) best = a;
  }
  UcbResult result;
  result.best_replicas = arms[best];
  result.mean_latency_ms = mean_latency[best];
  result.arms = arms;
  result.trial_counts = std::move(trials);
  result.mean_rewards = std::move(mean_reward);
  return result;
}

UcbResult ucb(const std::vector<int>& arms, const Workload& workload,
              double lambda_weight, const ClusterState& state, int service,
              const TrainerConfig& cfg, const RewardParams& rp,
              ClusterEvaluator& eval, const AppTopology& topo) {
  if (cfg.f_trials < static_cast<int>(arms.size()))
    fail("ucb: f_trials must be >= number of arms");
  RewardParams scoring = rp;
  scoring.lambda_weight = lambda_weight;
  ClusterState probe = state;
  auto play = [&](int count) -> std::pair<double, double> {
    probe.replicas[service] = count;
    SimReport report = eval.sample(workload, probe);
    double l_obs = objective_latency(report, scoring.objective);
    return {reward(scoring, l_obs, probe, topo), l_obs};
  };
  return ucb_core(arms, cfg.f_trials, cfg.epsilon, cfg.textbook_ucb_index,
                  play);
}

OptimizeResult optimize_cluster(const Workload& workload,
                                const ClusterState& start,
                                const TrainerConfig& cfg,
                                const RewardParams& rp, ClusterEvaluator& eval,
                                const AppTopology& topo) {
  validate_trainer(cfg);
  validate_state(start, topo);

  OptimizeResult res;
  res.state = start;
  double lambda = cfg.lambda_initial;
  double window_s = eval.window_duration_s();
  double achieved = std::numeric_limits<double>::infinity();

  while (true) {
    res.lambdas_used.push_back(lambda);
    bool met = false;
    for (int t = 0; t < cfg.t_iters && !met; ++t) {
      int service = 0;
      if (topo.service_count() > 1) {
        auto delta = eval.utilization_delta(workload, res.state);
        ++res.samples;
        res.cost_unit_seconds +=
            cluster_cost(res.state, topo, rp.cost_model) * window_s;
        service = select_service(delta);
      }

      auto arms = arm_set(res.state, service, cfg, topo);
      UcbResult u =
          ucb(arms, workload, lambda, res.state, service, cfg, rp, eval, topo);
      res.samples += cfg.f_trials;
      ClusterState probe = res.state;
      for (std::size_t a = 0; a < u.arms.size(); ++a) {
        if (u.trial_counts[a] == 0) continue;
        probe.replicas[service] = u.arms[a];
        res.cost_unit_seconds += u.trial_counts[a] *
                                 cluster_cost(probe, topo, rp.cost_model) *
                                 window_s;
      }

      res.state.replicas[service] = u.best_replicas;
      achieved = u.mean_latency_ms;
      res.cost_history.push_back(cluster_cost(res.state, topo, rp.cost_model));
      met = achieved <= rp.l_target_ms;
    }
    if (met) {
      res.target_met = true;
      break;
    }
    lambda += cfg.lambda_step();
    if (lambda > cfg.lambda_max + kEps) break;  // escalation exhausted
  }

  res.achieved_latency_ms = achieved;
  res.final_lambda = res.lambdas_used.back();
  res.timeout_regime = achieved >= eval.timeout_ms() - kEps;
  return res;
}

const PolicyEntry* TrainedPolicy::find(int dist_index, double rps) const {
  for (const auto& e : entries) {
    if (e.dist_index == dist_index && std::abs(e.rps - rps) < kEps) return &e;
  }
  return nullptr;
}

std::vector<const PolicyEntry*> TrainedPolicy::entries_for(
    int dist_index) const {
  std::vector<const PolicyEntry*> out;
  for (const auto& e : entries) {
    if (e.dist_index == dist_index) out.push_back(&e);
  }
  std::sort(out.begin(), out.end(),
            [](const PolicyEntry* a, const PolicyEntry* b) {
              return a->rps < b->rps;
            });
  return out;
}

std::uint64_t TrainedPolicy::total_samples() const {
  std::uint64_t total = 0;
  for (const auto& e : entries) total += e.samples;
  return total;
}

TrainedPolicy train(
    const WorkloadGrid& grid, const TrainerConfig& cfg, const RewardParams& rp,
    ClusterEvaluator& eval, const AppTopology& topo,
    const std::function<ClusterState(const Workload&)>& warm_start) {
  validate_grid(grid, topo.endpoint_count());
  validate_trainer(cfg);

  TrainedPolicy policy;
  policy.grid = grid;
  policy.reward_params = rp;

  auto rps_values = grid_rps_values(grid);
  for (int di = 0; di < static_cast<int>(grid.distributions.size()); ++di) {
    ClusterState carry;
    bool have_carry = false;
    for (double rps : rps_values) {
      Workload workload{rps, grid.distributions[di]};
      ClusterState start = have_carry ? carry
                           : warm_start ? warm_start(workload)
                                        : min_state(topo);
      OptimizeResult res =
          optimize_cluster(workload, start, cfg, rp, eval, topo);
      carry = res.state;
      have_carry = true;

      PolicyEntry entry;
      entry.dist_index = di;
      entry.rps = rps;
      entry.state = res.state;
      entry.achieved_latency_ms = res.achieved_latency_ms;
      entry.samples = res.samples;
      entry.target_met = res.target_met;
      entry.final_lambda = res.final_lambda;
      entry.cost_unit_seconds = res.cost_unit_seconds;
      policy.entries.push_back(std::move(entry));
    }
  }
  return policy;
}

std::string policy_to_json_text(const TrainedPolicy& policy) {
  nlohmann::json j;
  j["grid"] = {{"rps_lower", policy.grid.rps_lower},
               {"rps_upper", policy.grid.rps_upper},
               {"step", policy.grid.step},
               {"distributions", policy.grid.distributions}};
  j["reward_params"] = {
      {"l_target_ms", policy.reward_params.l_target_ms},
      {"lambda_weight", policy.reward_params.lambda_weight},
      {"objective", to_string(policy.reward_params.objective)},
      {"cost_model",
       {{"mode",
         policy.reward_params.cost_model.mode == CostMode::VmCount ? "vm"
                                                                   : "pod"},
        {"pods_per_vm", policy.reward_params.cost_model.pods_per_vm},
        {"cost_per_unit", policy.reward_params.cost_model.cost_per_unit}}}};
  j["entries"] = nlohmann::json::array();
  for (const auto& e : policy.entries) {
    j["entries"].push_back({{"dist_index", e.dist_index},
                            {"rps", e.rps},
                            {"replicas", e.state.replicas},
                            {"achieved_latency_ms", e.achieved_latency_ms},
                            {"samples", e.samples},
                            {"target_met", e.target_met},
                            {"final_lambda", e.final_lambda},
                            {"cost_unit_seconds", e.cost_unit_seconds}});
  }
  return j.dump(2);
}

TrainedPolicy policy_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TrainedPolicy policy;
  const auto& jg = j.at("grid");
  policy.grid.rps_lower = jg.at("rps_lower").get<double>();
  policy.grid.rps_upper = jg.at("rps_upper").get<double>();
  policy.grid.step = jg.at("step").get<double>();
  policy.grid.distributions =
      jg.at("distributions").get<std::vector<std::vector<double>>>();
  const auto& jr = j.at("reward_params");
  policy.reward_params.l_target_ms = jr.at("l_target_ms").get<double>();
  policy.reward_params.lambda_weight = jr.at("lambda_weight").get<double>();
  policy.reward_params.objective =
      objective_from_string(jr.at("objective").get<std::string>());
  const auto& jc = jr.at("cost_model");
  policy.reward_params.cost_model.mode =
      jc.at("mode").get<std::string>() == "pod" ? CostMode::PodCount
                                                : CostMode::VmCount;
  policy.reward_params.cost_model.pods_per_vm = jc.at("pods_per_vm").get<int>();
  policy.reward_params.cost_model.cost_per_unit =
      jc.at("cost_per_unit").get<double>();
  for (const auto& je : j.at("entries")) {
    PolicyEntry e;
    e.dist_index = je.at("dist_index").get<int>();
    e.rps = je.at("rps").get<double>();
    e.state.replicas = je.at("replicas").get<std::vector<int>>();
    e.achieved_latency_ms = je.at("achieved_latency_ms").get<double>();
    e.samples = je.at("samples").get<std::uint64_t>();
    e.target_met = je.value("target_met", true);
    e.final_lambda = je.value("final_lambda", 0.0);
    e.cost_unit_seconds = je.value("cost_unit_seconds", 0.0);
    policy.entries.push_back(std::move(e));
  }
  return policy;
}

TrainedPolicy load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open policy file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return policy_from_json_text(ss.str());
  } catch (const std::exception& ex) {
    fail(path + ": " + ex.what());
  }
}

void save_policy(const TrainedPolicy& policy, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write policy file: " + path);
  out << policy_to_json_text(policy) << "\n";
}

void validate_controller(const ControllerConfig& cfg) {
  if (!(cfg.metrics_period_s > 0.0))
    fail("controller: metrics_period_s must be > 0");
  if (!(cfg.actuation_lag_s > 0.0))
    fail("controller: actuation_lag_s must be > 0");
  if (!(cfg.fallback_threshold > 0.0))
    fail("controller: fallback_threshold must be > 0");
  validate_hpa(cfg.fallback_hpa);
}

std::optional<std::vector<double>> interpolate_rps(const TrainedPolicy& policy,
                                                   int dist_index,
                                                   double observed_rps) {
  auto points = policy.entries_for(dist_index);
  if (points.empty())
    fail("interpolate_rps: no trained entries for distribution index " +
         std::to_string(dist_index));
  double lower = points.front()->rps;
  double upper = points.back()->rps;
  double eps = kEps * std::max(1.0, std::abs(upper));
  if (observed_rps < lower - eps || observed_rps > upper + eps)
    return std::nullopt;

  auto as_doubles = [](const PolicyEntry* e) {
    return std::vector<double>(e->state.replicas.begin(),
                               e->state.replicas.end());
  };
  for (const auto* p : points) {
    if (std::abs(p->rps - observed_rps) <= eps) return as_doubles(p);
  }
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    double r_lo = points[i]->rps;
    double r_hi = points[i + 1]->rps;
    if (observed_rps < r_lo || observed_rps > r_hi) continue;
    // Inverse-distance weights: the nearer grid point dominates and the
    // result is exact at both ends.
    double w_hi = (observed_rps - r_lo) / (r_hi - r_lo);
    double w_lo = 1.0 - w_hi;
    auto lo_state = as_doubles(points[i]);
    auto hi_state = as_doubles(points[i + 1]);
    std::vector<double> out(lo_state.size());
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] = w_lo * lo_state[k] + w_hi * hi_state[k];
    return out;
  }
  return std::nullopt;
}

std::optional<std::vector<double>> interpolate_distribution(
    const TrainedPolicy& policy, const Workload& observed) {
  const auto& dists = policy.grid.distributions;
  if (dists.empty()) fail("interpolate_distribution: policy has no grid");
  if (observed.endpoint_probs.size() != dists.front().size())
    fail("interpolate_distribution: distribution length mismatch");

  std::vector<std::vector<double>> states;
  std::vector<double> distances;
  for (int j = 0; j < static_cast<int>(dists.size()); ++j) {
    auto s = interpolate_rps(policy, j, observed.total_rps);
    if (!s) return std::nullopt;
    double d2 = 0.0;
    for (std::size_t k = 0; k < dists[j].size(); ++k) {
      double diff = observed.endpoint_probs[k] - dists[j][k];
      d2 += diff * diff;
    }
    double d = std::sqrt(d2);
    if (d < 1e-12) return s;  // exact distribution match wins outright
    states.push_back(std::move(*s));
    distances.push_back(d);
  }

  double weight_sum = 0.0;
  for (double d : distances) weight_sum += 1.0 / d;
  std::vector<double> out(states.front().size(), 0.0);
  for (std::size_t j = 0; j < states.size(); ++j) {
    double w = (1.0 / distances[j]) / weight_sum;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * states[j][k];
  }
  return out;
}

ClusterState materialize(const std::vector<double>& fractional,
                         const AppTopology& topo) {
  if (fractional.size() != topo.services.size())
    fail("materialize: dimension mismatch");
  ClusterState s;
  s.replicas.resize(fractional.size());
  for (std::size_t i = 0; i < fractional.size(); ++i) {
    int r = static_cast<int>(std::ceil(fractional[i] - kEps));
    s.replicas[i] = std::clamp(r, topo.services[i].min_replicas,
                               topo.services[i].max_replicas);
  }
  return s;
}

ScalingPlan controller_step(const ControllerConfig& cfg,
                            const TrainedPolicy& policy,
                            const Workload& observed,
                            const ClusterState& current,
                            const AppTopology& topo, const CostModel& cm) {
  validate_controller(cfg);
  validate_state(current, topo);

  ScalingPlan plan;
  double upper = policy.grid.rps_upper;
  if (observed.total_rps > (1.0 + cfg.fallback_threshold) * upper) {
    plan.fallback = true;
    return plan;
  }

  // Rates under the trained range (or mildly above, within the fallback
  // margin) are served by the nearest grid edge.
  Workload clamped = observed;
  clamped.total_rps =
      std::clamp(observed.total_rps, policy.grid.rps_lower, upper);
  auto fractional = interpolate_distribution(policy, clamped);
  if (!fractional) {
    plan.fallback = true;  // degenerate policy; be safe
    return plan;
  }
  ClusterState target = materialize(*fractional, topo);
  plan.target = target;
  if (target == current) return plan;

  int vm_add = 0;
  int vm_remove = 0;
  for (std::size_t i = 0; i < target.replicas.size(); ++i) {
    int delta = vms_for_service(target.replicas[i], cm) -
                vms_for_service(current.replicas[i], cm);
    if (delta > 0) vm_add += delta;
    if (delta < 0) vm_remove -= delta;
  }

  // Scale-up rents VMs before pods land on them; scale-down drains pods
  // before the idle VMs are cordoned away.
  if (vm_add > 0)
    plan.actions.push_back({ScalingAction::Kind::AddVms, vm_add, {},
                            cfg.actuation_lag_s});
  plan.actions.push_back(
      {ScalingAction::Kind::ScalePods, 0, target, cfg.actuation_lag_s});
  if (vm_remove > 0)
    plan.actions.push_back({ScalingAction::Kind::RemoveVms, vm_remove, {},
                            cfg.actuation_lag_s});
  return plan;
}

namespace {

struct PendingChange {
  double at_s;
  ClusterState state;
};

}  // namespace

EvalTrace run_controller(const ControllerConfig& cfg,
                         const TrainedPolicy& policy,
                         const WorkloadSchedule& schedule,
                         const AppTopology& topo, const CostModel& cm,
                         const SimConfig& sim_cfg,
                         std::optional<ClusterState> start) {
  validate_controller(cfg);
  EvalTrace trace;
  ClusterState state = start.value_or(min_state(topo));
  validate_state(state, topo);
  trace.state_history.push_back({0.0, state, false});

  double clock = 0.0;
  bool fallback_mode = false;
  std::vector<PendingChange> pending;

  auto run_window = [&](const Workload& w, double from, double to,
                        WindowAccumulator& acc) {
    if (to - from < 1e-9) return;
    SimConfig wcfg = sim_cfg;
    wcfg.duration_s = to - from;
    wcfg.warmup_s = 0.0;
    wcfg.seed = mix_seed(
        sim_cfg.seed, static_cast<std::uint64_t>(std::llround(from * 1000.0)));
    std::vector<double> samples;
    SimReport report = simulate(w, state, topo, cm, wcfg, &samples);
    acc.add(report, samples, to - from);
  };

  for (const auto& seg : schedule.segments) {
    WindowAccumulator acc;
    double seg_end = clock + seg.duration_s;
    while (clock < seg_end - 1e-9) {
      double window_end = std::min(clock + cfg.metrics_period_s, seg_end);

      if (fallback_mode) {
        // Delegated to the utilization-threshold loop at its own period.
        double t = clock;
        while (t < window_end - 1e-9) {
          double sub_end = std::min(t + cfg.fallback_hpa.period_s, window_end);
          SimConfig wcfg = sim_cfg;
          wcfg.duration_s = sub_end - t;
          wcfg.warmup_s = 0.0;
          wcfg.seed = mix_seed(
              sim_cfg.seed, static_cast<std::uint64_t>(std::llround(t * 1000.0)));
          std::vector<double> samples;
          SimReport report =
              simulate(seg.workload, state, topo, cm, wcfg, &samples);
          acc.add(report, samples, sub_end - t);
          std::vector<double> util = report.mean_utilization;
          for (double& u : util) u = std::clamp(u, 0.0, 1.0);
          ClusterState next = hpa_step(cfg.fallback_hpa, state, util, topo);
          if (!(next == state)) {
            state = next;
            trace.state_history.push_back({sub_end, state, true});
          }
          t = sub_end;
        }
      } else {
        double t = clock;
        while (t < window_end - 1e-9) {
          if (!pending.empty() && pending.front().at_s <= t + 1e-9) {
            state = pending.front().state;
            pending.erase(pending.begin());
            trace.state_history.push_back({t, state, false});
            continue;
          }
          double sub_end = window_end;
          if (!pending.empty())
            sub_end = std::min(sub_end, pending.front().at_s);
          run_window(seg.workload, t, sub_end, acc);
          t = sub_end;
        }
      }

      clock = window_end;

      // The metrics agent reports this window's workload; the plan computed
      // from it only affects later windows (one-period input lag).
      ScalingPlan plan =
          controller_step(cfg, policy, seg.workload, state, topo, cm);
      if (plan.fallback != fallback_mode) {
        fallback_mode = plan.fallback;
        trace.state_history.push_back({clock, state, fallback_mode});
      }
      if (plan.fallback) {
        pending.clear();
      } else {
        pending.clear();  // a newer plan supersedes anything outstanding
        if (plan.target && !(*plan.target == state)) {
          pending.push_back({clock + cfg.actuation_lag_s, *plan.target});
        }
      }
    }

    EvalTrace::SegmentResult result;
    result.workload = seg.workload;
    result.duration_s = seg.duration_s;
    result.report = acc.finalize(sim_cfg.timeout_ms);
    trace.segments.push_back(std::move(result));
  }
  return trace;
}

}  // namespace cola
