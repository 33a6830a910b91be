#include "cola/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cola/queueing.hpp"
#include "cola/rng.hpp"

namespace cola {

namespace {

// Seed tags for the independent random streams of one experiment.
constexpr std::uint64_t kEvalStream = 0xE7A1;
constexpr std::uint64_t kColaTrainStream = 0x0C01A;
constexpr std::uint64_t kLrTrainStream = 0x17;
constexpr std::uint64_t kOracleStream = 0x0AC1;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

SimReport simulate_segment(const Workload& w, const ClusterState& state,
                           const AppTopology& topo, const CostModel& cm,
                           const SimConfig& base, double start_s,
                           double duration_s) {
  SimConfig cfg = base;
  cfg.duration_s = duration_s;
  cfg.warmup_s = 0.0;
  cfg.seed = mix_seed(base.seed,
                      static_cast<std::uint64_t>(std::llround(start_s * 1000.0)));
  return simulate(w, state, topo, cm, cfg);
}

}  // namespace

PolicySpec parse_policy(const std::string& text) {
  PolicySpec spec;
  if (text == "cola") {
    spec.kind = PolicySpec::Kind::Cola;
    spec.name = "cola";
    return spec;
  }
  if (text == "lr") {
    spec.kind = PolicySpec::Kind::LinReg;
    spec.name = "lr";
    return spec;
  }
  if (text == "oracle") {
    spec.kind = PolicySpec::Kind::Oracle;
    spec.name = "oracle";
    return spec;
  }
  if (text.rfind("cpu:", 0) == 0) {
    double t = std::stod(text.substr(4));
    if (t > 1.0) t /= 100.0;  // "cpu:30" means 30%
    if (!(t > 0.0) || t > 1.0)
      throw std::invalid_argument("policy " + text +
                                  ": threshold must land in (0, 1]");
    spec.kind = PolicySpec::Kind::CpuThreshold;
    spec.threshold = t;
    spec.name = "cpu-" + std::to_string(static_cast<int>(std::lround(t * 100)));
    return spec;
  }
  throw std::invalid_argument("unknown policy: " + text +
                              " (expected cola|cpu:<T>|lr|oracle)");
}

std::uint64_t state_space_size(const AppTopology& topo) {
  std::uint64_t total = 1;
  for (const auto& s : topo.services) {
    std::uint64_t span =
        static_cast<std::uint64_t>(s.max_replicas - s.min_replicas + 1);
    if (total > UINT64_MAX / span) return UINT64_MAX;
    total *= span;
  }
  return total;
}

std::vector<std::pair<ClusterState, double>> exhaustive_oracle(
    const Workload& workload, const AppTopology& topo, const CostModel& cm,
    const RewardParams& rp, const SimConfig& sim_cfg, EvaluatorKind kind,
    std::uint64_t seed, std::uint64_t state_cap) {
  validate_topology(topo);
  std::uint64_t size = state_space_size(topo);
  if (size > state_cap)
    throw std::runtime_error(
        "exhaustive oracle: state space has " + std::to_string(size) +
        " states, above the cap of " + std::to_string(state_cap));

  auto eval = make_evaluator(kind, topo, cm, sim_cfg, seed);
  std::vector<std::pair<ClusterState, double>> ranked;
  ranked.reserve(size);

  ClusterState state = min_state(topo);
  while (true) {
    SimReport report = eval->sample(workload, state);
    double l_obs = objective_latency(report, rp.objective);
    ranked.emplace_back(state, reward(rp, l_obs, state, topo));

    // Odometer step through the replica ranges.
    int i = topo.service_count() - 1;
    while (i >= 0 && state.replicas[i] == topo.services[i].max_replicas) {
      state.replicas[i] = topo.services[i].min_replicas;
      --i;
    }
    if (i < 0) break;
    ++state.replicas[i];
  }

  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    double ca = cluster_cost(a.first, topo, cm);
    double cb = cluster_cost(b.first, topo, cm);
    if (ca != cb) return ca < cb;
    return a.first.replicas < b.first.replicas;
  });
  return ranked;
}

TrainingCostReport training_cost_report(const TrainedPolicy& policy,
                                        const SimConfig& sim_cfg) {
  TrainingCostReport report;
  for (const auto& e : policy.entries) {
    report.total_samples += e.samples;
    report.cost_unit_hours += e.cost_unit_seconds / 3600.0;
  }
  report.simulated_time_s = report.total_samples * sim_cfg.duration_s;
  return report;
}

std::optional<double> amortization_hours(const TrainingCostReport& report,
                                         double baseline_cost_rate,
                                         double cola_cost_rate) {
  double savings = baseline_cost_rate - cola_cost_rate;
  if (!(savings > 0.0)) return std::nullopt;
  return report.cost_unit_hours / savings;
}

namespace {

TrainedPolicy obtain_cola_policy(const ExperimentSpec& spec) {
  if (spec.policy_file) return load_policy(*spec.policy_file);

  std::string cache_path;
  if (!spec.cache_dir.empty()) {
    // Cache key over everything that shapes the trained artifact.
    std::ostringstream key;
    key << topology_to_json_text(spec.topology) << '|' << spec.grid.rps_lower
        << ':' << spec.grid.rps_upper << ':' << spec.grid.step << '|';
    for (const auto& d : spec.grid.distributions)
      for (double p : d) key << p << ',';
    key << '|' << spec.reward_params.l_target_ms << '|'
        << to_string(spec.reward_params.objective) << '|'
        << spec.trainer.lambda_initial << '|' << spec.trainer.lambda_max << '|'
        << spec.trainer.epsilon << '|' << spec.trainer.f_trials << '|'
        << spec.trainer.t_iters << '|' << spec.master_seed << '|'
        << (spec.training_evaluator == EvaluatorKind::Des ? "des" : "analytic");
    std::filesystem::create_directories(spec.cache_dir);
    cache_path = spec.cache_dir + "/cola-" + std::to_string(fnv1a(key.str())) +
                 ".policy.json";
    if (std::filesystem::exists(cache_path)) return load_policy(cache_path);
  }

  SimConfig train_cfg = spec.sim;
  auto eval =
      make_evaluator(spec.training_evaluator, spec.topology, spec.cost_model,
                     train_cfg, mix_seed(spec.master_seed, kColaTrainStream));
  TrainedPolicy policy = train(spec.grid, spec.trainer, spec.reward_params,
                               *eval, spec.topology);
  if (!cache_path.empty()) save_policy(policy, cache_path);
  return policy;
}

LinRegModel train_lr_baseline(const ExperimentSpec& spec,
                              std::uint64_t* samples_used) {
  auto eval = make_evaluator(spec.training_evaluator, spec.topology,
                             spec.cost_model, spec.sim,
                             mix_seed(spec.master_seed, kLrTrainStream));
  Rng rng(mix_seed(spec.master_seed, kLrTrainStream + 1));
  std::vector<LrSample> samples;
  samples.reserve(spec.lr_training_samples);
  for (int n = 0; n < spec.lr_training_samples; ++n) {
    LrSample s;
    s.state.replicas.resize(spec.topology.services.size());
    for (std::size_t i = 0; i < spec.topology.services.size(); ++i) {
      const auto& svc = spec.topology.services[i];
      int span = svc.max_replicas - svc.min_replicas + 1;
      s.state.replicas[i] =
          svc.min_replicas + static_cast<int>(rng.uniform() * span) % span;
    }
    double rps = rng.uniform(spec.grid.rps_lower, spec.grid.rps_upper);
    std::size_t di = spec.grid.distributions.size() > 1
                         ? static_cast<std::size_t>(
                               rng.uniform() * spec.grid.distributions.size())
                         : 0;
    di = std::min(di, spec.grid.distributions.size() - 1);
    s.workload = Workload{rps, spec.grid.distributions[di]};
    SimReport report = eval->sample(s.workload, s.state);
    double l_obs = objective_latency(report, spec.reward_params.objective);
    s.reward = reward(spec.reward_params, l_obs, s.state, spec.topology);
    samples.push_back(std::move(s));
  }
  *samples_used = samples.size();
  return lr_train(samples, spec.topology);
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  validate_topology(spec.topology);
  validate_cost_model(spec.cost_model);
  if (spec.policies.empty())
    throw std::invalid_argument("experiment: at least one policy required");

  SimConfig eval_cfg = spec.sim;
  eval_cfg.seed = mix_seed(spec.master_seed, kEvalStream);

  std::vector<ResultRow> rows;
  for (const auto& pol : spec.policies) {
    switch (pol.kind) {
      case PolicySpec::Kind::Cola: {
        TrainedPolicy policy = obtain_cola_policy(spec);
        EvalTrace trace =
            run_controller(spec.controller, policy, spec.schedule,
                           spec.topology, spec.cost_model, eval_cfg);
        for (const auto& seg : trace.segments) {
          rows.push_back({seg.workload.total_rps, pol.name,
                          seg.report.median_ms, seg.report.p90_ms,
                          seg.report.failures_per_s, seg.report.cost_units,
                          policy.total_samples()});
        }
        break;
      }
      case PolicySpec::Kind::CpuThreshold: {
        HpaConfig hpa;
        hpa.threshold = pol.threshold;
        EvalTrace trace = run_hpa(hpa, spec.schedule, spec.topology,
                                  spec.cost_model, eval_cfg);
        for (const auto& seg : trace.segments) {
          rows.push_back({seg.workload.total_rps, pol.name,
                          seg.report.median_ms, seg.report.p90_ms,
                          seg.report.failures_per_s, seg.report.cost_units, 0});
        }
        break;
      }
      case PolicySpec::Kind::LinReg: {
        std::uint64_t samples_used = 0;
        LinRegModel model = train_lr_baseline(spec, &samples_used);
        double start = 0.0;
        for (const auto& seg : spec.schedule.segments) {
          ClusterState state =
              lr_infer(model, seg.workload, spec.topology, spec.cost_model,
                       spec.lr_candidates, mix_seed(spec.master_seed, 0xF3));
          SimReport report =
              simulate_segment(seg.workload, state, spec.topology,
                               spec.cost_model, eval_cfg, start, seg.duration_s);
          rows.push_back({seg.workload.total_rps, pol.name, report.median_ms,
                          report.p90_ms, report.failures_per_s,
                          report.cost_units, samples_used});
          start += seg.duration_s;
        }
        break;
      }
      case PolicySpec::Kind::Oracle: {
        double start = 0.0;
        for (const auto& seg : spec.schedule.segments) {
          auto ranked = exhaustive_oracle(
              seg.workload, spec.topology, spec.cost_model, spec.reward_params,
              spec.sim, spec.training_evaluator,
              mix_seed(spec.master_seed, kOracleStream));
          const ClusterState& state = ranked.front().first;
          SimReport report =
              simulate_segment(seg.workload, state, spec.topology,
                               spec.cost_model, eval_cfg, start, seg.duration_s);
          rows.push_back({seg.workload.total_rps, pol.name, report.median_ms,
                          report.p90_ms, report.failures_per_s,
                          report.cost_units, ranked.size()});
          start += seg.duration_s;
        }
        break;
      }
    }
  }

  if (!spec.out_csv.empty()) {
    std::ofstream out(spec.out_csv, std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write CSV file: " + spec.out_csv);
    out << results_to_csv(rows);
  }
  return rows;
}

std::string results_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "users,policy,median_ms,p90_ms,failures_per_s,cost_units,samples\n";
  for (const auto& r : rows) {
    out << fmt(r.users) << ',' << r.policy << ',' << fmt(r.median_ms) << ','
        << fmt(r.p90_ms) << ',' << fmt(r.failures_per_s) << ','
        << fmt(r.cost_units) << ',' << r.samples << '\n';
  }
  return out.str();
}

std::optional<AppTopology> builtin_topology(const std::string& name) {
  // Synthetic desk-scale fixtures; service rates and paths are invented to
  // exercise the machinery, not calibrated to the referenced demo apps.
  if (name == "sws") {
    return topology_from_json_text(R"({
      "services": [{"name": "web", "mu": 500.0, "max_replicas": 30}],
      "endpoints": [{"name": "get", "path": ["web"], "base_delay_ms": 40.0}]
    })");
  }
  if (name == "bookinfo4") {
    return topology_from_json_text(R"({
      "services": [
        {"name": "productpage", "mu": 250.0, "max_replicas": 20},
        {"name": "details", "mu": 400.0, "max_replicas": 20},
        {"name": "reviews", "mu": 200.0, "max_replicas": 20},
        {"name": "ratings", "mu": 350.0, "max_replicas": 20}
      ],
      "endpoints": [
        {"name": "product", "path": ["productpage", "details", "reviews", "ratings"],
         "base_delay_ms": 10.0}
      ]
    })");
  }
  if (name == "boutique11") {
    return topology_from_json_text(R"({
      "services": [
        {"name": "frontend", "mu": 600.0, "max_replicas": 25},
        {"name": "productcatalog", "mu": 400.0, "max_replicas": 25},
        {"name": "currency", "mu": 800.0, "max_replicas": 25},
        {"name": "cart", "mu": 300.0, "max_replicas": 25},
        {"name": "recommendation", "mu": 350.0, "max_replicas": 25},
        {"name": "shipping", "mu": 500.0, "max_replicas": 25},
        {"name": "checkout", "mu": 250.0, "max_replicas": 25},
        {"name": "payment", "mu": 450.0, "max_replicas": 25},
        {"name": "email", "mu": 700.0, "max_replicas": 25},
        {"name": "ad", "mu": 900.0, "max_replicas": 25},
        {"name": "redis", "mu": 1000.0, "max_replicas": 25}
      ],
      "endpoints": [
        {"name": "home", "path": ["frontend", "currency", "productcatalog", "ad"],
         "base_delay_ms": 5.0},
        {"name": "browse", "path": ["frontend", "productcatalog", "currency", "recommendation"],
         "base_delay_ms": 5.0},
        {"name": "view_cart", "path": ["frontend", "cart", "redis", "currency"],
         "base_delay_ms": 5.0},
        {"name": "add_cart", "path": ["frontend", "productcatalog", "cart", "redis"],
         "base_delay_ms": 5.0},
        {"name": "checkout", "path": ["frontend", "checkout", "cart", "payment", "shipping", "currency", "email"],
         "base_delay_ms": 8.0},
        {"name": "ads", "path": ["frontend", "ad", "recommendation"],
         "base_delay_ms": 4.0}
      ]
    })");
  }
  return std::nullopt;
}

AppTopology resolve_topology(const std::string& name_or_path) {
  if (auto builtin = builtin_topology(name_or_path)) return *builtin;
  return load_topology(name_or_path);
}

}  // namespace cola
