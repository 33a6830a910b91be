#include "cola/autoscalers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cola/rng.hpp"
#include "json.hpp"

namespace cola {

Objective objective_from_string(const std::string& s) {
  if (s == "median") return Objective::Median;
  if (s == "mean") return Objective::Mean;
  if (s == "p90") return Objective::P90;
  throw std::invalid_argument("unknown objective: " + s +
                              " (expected median|mean|p90)");
}

std::string to_string(Objective o) {
  switch (o) {
    case Objective::Median: return "median";
    case Objective::Mean: return "mean";
    case Objective::P90: return "p90";
  }
  return "median";
}

double objective_latency(const SimReport& report, Objective o) {
  switch (o) {
    case Objective::Median: return report.median_ms;
    case Objective::Mean: return report.mean_ms;
    case Objective::P90: return report.p90_ms;
  }
  return report.median_ms;
}

double reward(const RewardParams& p, double l_obs_ms, const ClusterState& state,
              const AppTopology& topo) {
  if (!(p.l_target_ms > 0.0))
    throw std::invalid_argument("reward: l_target_ms must be > 0");
  if (!(p.lambda_weight > 0.0))
    throw std::invalid_argument("reward: lambda_weight must be > 0");
  if (l_obs_ms < 0.0)
    throw std::invalid_argument("reward: negative observed latency");
  double latency_term =
      p.lambda_weight * std::min(p.l_target_ms - l_obs_ms, 0.0);
  return latency_term - cluster_cost(state, topo, p.cost_model);
}

void validate_hpa(const HpaConfig& cfg) {
  auto check = [](double t) {
    if (!(t > 0.0) || t > 1.0)
      throw std::invalid_argument("HPA threshold must be in (0, 1]");
  };
  check(cfg.threshold);
  for (double t : cfg.per_service_thresholds) check(t);
  if (!(cfg.period_s > 0.0))
    throw std::invalid_argument("HPA period must be > 0");
}

ClusterState hpa_step(const HpaConfig& cfg, const ClusterState& current,
                      const std::vector<double>& measured_util,
                      const AppTopology& topo) {
  validate_hpa(cfg);
  validate_state(current, topo);
  if (measured_util.size() != current.replicas.size())
    throw std::invalid_argument("hpa_step: utilization vector length mismatch");
  ClusterState next = current;
  for (std::size_t i = 0; i < next.replicas.size(); ++i) {
    double threshold = cfg.per_service_thresholds.empty()
                           ? cfg.threshold
                           : cfg.per_service_thresholds[i];
    double desired = std::ceil(current.replicas[i] *
                               (measured_util[i] / threshold));
    int r = static_cast<int>(desired);
    next.replicas[i] = std::clamp(r, topo.services[i].min_replicas,
                                  topo.services[i].max_replicas);
  }
  return next;
}

double EvalTrace::time_averaged_cost(const AppTopology& topo,
                                     const CostModel& cm,
                                     double total_duration_s) const {
  if (state_history.empty() || total_duration_s <= 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < state_history.size(); ++i) {
    double until = (i + 1 < state_history.size()) ? state_history[i + 1].at_s
                                                  : total_duration_s;
    double span = std::max(0.0, until - state_history[i].at_s);
    acc += span * cluster_cost(state_history[i].state, topo, cm);
  }
  return acc / total_duration_s;
}

EvalTrace run_hpa(const HpaConfig& cfg, const WorkloadSchedule& schedule,
                  const AppTopology& topo, const CostModel& cm,
                  const SimConfig& sim_cfg, std::optional<ClusterState> start) {
  validate_hpa(cfg);
  EvalTrace trace;
  ClusterState state = start.value_or(min_state(topo));
  validate_state(state, topo);

  double clock = 0.0;
  trace.state_history.push_back({0.0, state, false});

  for (const auto& seg : schedule.segments) {
    WindowAccumulator acc;
    double remaining = seg.duration_s;
    while (remaining > 1e-9) {
      double window = std::min(cfg.period_s, remaining);
      SimConfig wcfg = sim_cfg;
      wcfg.duration_s = window;
      wcfg.warmup_s = 0.0;
      // Keyed by window start time so concurrent policy evaluations under the
      // same base seed see the same arrival process per window.
      wcfg.seed = mix_seed(sim_cfg.seed,
                           static_cast<std::uint64_t>(std::llround(clock * 1000.0)));
      std::vector<double> samples;
      SimReport report = simulate(seg.workload, state, topo, cm, wcfg, &samples);
      acc.add(report, samples, window);

      std::vector<double> util = report.mean_utilization;
      for (double& u : util) u = std::clamp(u, 0.0, 1.0);
      ClusterState next = hpa_step(cfg, state, util, topo);
      clock += window;
      remaining -= window;
      if (!(next == state)) {
        state = next;
        trace.state_history.push_back({clock, state, false});
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

namespace {

std::vector<double> lr_features(const Workload& workload,
                                const ClusterState& state) {
  std::vector<double> x;
  x.reserve(2 * state.replicas.size() + 2);
  for (int r : state.replicas) x.push_back(static_cast<double>(r));
  for (int r : state.replicas) x.push_back(workload.total_rps / r);
  x.push_back(workload.total_rps);
  x.push_back(1.0);
  return x;
}

// Solves A x = b by Gaussian elimination with partial pivoting. Returns false
// when a pivot collapses (rank deficiency).
bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-12) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      double factor = a[r][col] / a[col][col];
      if (factor == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[r][k] -= factor * a[col][k];
      b[r] -= factor * b[col];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

}  // namespace

std::vector<std::string> LinRegModel::feature_names(
    const AppTopology& topo) const {
  std::vector<std::string> names;
  for (const auto& s : topo.services) names.push_back("replicas_" + s.name);
  for (const auto& s : topo.services)
    names.push_back("rps_per_replica_" + s.name);
  names.push_back("rps");
  names.push_back("intercept");
  return names;
}

LinRegModel lr_train(const std::vector<LrSample>& samples,
                     const AppTopology& topo) {
  const std::size_t dim = 2 * topo.services.size() + 2;
  if (samples.size() < dim)
    throw std::invalid_argument("lr_train: need at least " +
                                std::to_string(dim) + " samples, got " +
                                std::to_string(samples.size()));

  // Normal equations X^T X beta = X^T y.
  std::vector<std::vector<double>> xtx(dim, std::vector<double>(dim, 0.0));
  std::vector<double> xty(dim, 0.0);
  for (const auto& s : samples) {
    validate_state(s.state, topo);
    auto x = lr_features(s.workload, s.state);
    for (std::size_t i = 0; i < dim; ++i) {
      xty[i] += x[i] * s.reward;
      for (std::size_t j = 0; j < dim; ++j) xtx[i][j] += x[i] * x[j];
    }
  }

  LinRegModel model;
  model.sample_count = samples.size();
  if (!solve_linear(xtx, xty, model.coefficients)) {
    // Rank-deficient design: ridge fallback.
    for (std::size_t i = 0; i < dim; ++i) xtx[i][i] += 1e-8;
    if (!solve_linear(xtx, xty, model.coefficients))
      throw std::runtime_error("lr_train: singular design matrix");
    model.ridge_fallback = true;
  }
  return model;
}

double lr_predict(const LinRegModel& model, const Workload& workload,
                  const ClusterState& state) {
  auto x = lr_features(workload, state);
  if (x.size() != model.coefficients.size())
    throw std::invalid_argument("lr_predict: feature dimension mismatch");
  double y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) y += model.coefficients[i] * x[i];
  return y;
}

ClusterState lr_infer(const LinRegModel& model, const Workload& workload,
                      const AppTopology& topo, const CostModel& cm,
                      int n_candidates, std::uint64_t seed) {
  if (model.coefficients.empty())
    throw std::invalid_argument("lr_infer: untrained model");
  Rng rng(mix_seed(seed, 0xCAFE));
  ClusterState best;
  double best_reward = 0.0;
  double best_cost = 0.0;
  bool have_best = false;
  ClusterState candidate;
  candidate.replicas.resize(topo.services.size());
  for (int n = 0; n < n_candidates; ++n) {
    for (std::size_t i = 0; i < topo.services.size(); ++i) {
      const auto& svc = topo.services[i];
      int span = svc.max_replicas - svc.min_replicas + 1;
      candidate.replicas[i] =
          svc.min_replicas +
          static_cast<int>(rng.uniform() * span) % span;
    }
    double predicted = lr_predict(model, workload, candidate);
    if (!have_best) {
      best = candidate;
      best_reward = predicted;
      best_cost = cluster_cost(candidate, topo, cm);
      have_best = true;
      continue;
    }
    if (predicted > best_reward) {
      best = candidate;
      best_reward = predicted;
      best_cost = cluster_cost(candidate, topo, cm);
    } else if (predicted == best_reward) {
      double cost = cluster_cost(candidate, topo, cm);
      if (cost < best_cost ||
          (cost == best_cost && candidate.replicas < best.replicas)) {
        best = candidate;
        best_cost = cost;
      }
    }
  }
  return best;
}

std::string lr_model_to_json_text(const LinRegModel& model,
                                  const AppTopology& topo) {
  nlohmann::json j;
  j["features"] = model.feature_names(topo);
  j["coefficients"] = model.coefficients;
  j["sample_count"] = model.sample_count;
  j["ridge_fallback"] = model.ridge_fallback;
  return j.dump(2);
}

LinRegModel lr_model_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  LinRegModel model;
  model.coefficients = j.at("coefficients").get<std::vector<double>>();
  model.sample_count = j.value("sample_count", std::uint64_t{0});
  model.ridge_fallback = j.value("ridge_fallback", false);
  return model;
}

}  // namespace cola
