#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cola/harness.hpp"
#include "cola/rng.hpp"

namespace {

struct CommonOpts {
  std::string topology = "sws";
  std::string grid_text;
  double target_ms = 50.0;
  std::string objective = "median";
  std::uint64_t seed = 0;
  std::string cost_mode = "vm";
  int pods_per_vm = 1;
  double cost_per_unit = 15.0;
  double duration_s = 30.0;
  double timeout_ms = 2000.0;
  double noise_sd_ms = 0.0;
  bool analytic = false;
  double lambda_initial = 1.0 / 3.0;
  double lambda_max = 20.0;
  double epsilon = 1.0;
  int trials = 10;
  int iters = 20;
  int arm_window = 2;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--topology", o.topology,
                  "topology JSON file or builtin name (sws, bookinfo4, boutique11)");
  cmd->add_option("--target-ms", o.target_ms, "latency target in ms");
  cmd->add_option("--objective", o.objective, "median|p90|mean")
      ->check(CLI::IsMember({"median", "p90", "mean"}));
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--cost-mode", o.cost_mode, "vm|pod")
      ->check(CLI::IsMember({"vm", "pod"}));
  cmd->add_option("--pods-per-vm", o.pods_per_vm, "pods packed per VM");
  cmd->add_option("--cost-per-unit", o.cost_per_unit, "cost coefficient per unit");
  cmd->add_option("--duration-s", o.duration_s, "sample window length");
  cmd->add_option("--timeout-ms", o.timeout_ms, "client timeout");
  cmd->add_option("--noise-sd-ms", o.noise_sd_ms, "Gaussian noise on percentiles");
  cmd->add_flag("--analytic", o.analytic,
                "use the closed-form latency surrogate instead of the DES");
  cmd->add_option("--lambda-initial", o.lambda_initial, "initial reward weight");
  cmd->add_option("--lambda-max", o.lambda_max, "weight escalation ceiling");
  cmd->add_option("--epsilon", o.epsilon, "bandit count prior (1/epsilon = weight step)");
  cmd->add_option("--trials", o.trials, "bandit trials per service optimization");
  cmd->add_option("--iters", o.iters, "service-selection iterations per weight");
  cmd->add_option("--arm-window", o.arm_window, "replica window around the current count");
}

cola::WorkloadGrid parse_grid(const std::string& text, int endpoints) {
  cola::WorkloadGrid grid;
  auto first = text.find(':');
  auto second = text.find(':', first + 1);
  if (first == std::string::npos || second == std::string::npos)
    throw CLI::ValidationError("--grid", "expected lower:upper:step");
  grid.rps_lower = std::stod(text.substr(0, first));
  grid.rps_upper = std::stod(text.substr(first + 1, second - first - 1));
  grid.step = std::stod(text.substr(second + 1));
  grid.distributions = {cola::uniform_distribution(endpoints)};
  return grid;
}

cola::ExperimentSpec build_spec(const CommonOpts& o) {
  cola::ExperimentSpec spec;
  spec.topology = cola::resolve_topology(o.topology);
  spec.cost_model.mode =
      o.cost_mode == "pod" ? cola::CostMode::PodCount : cola::CostMode::VmCount;
  spec.cost_model.pods_per_vm = o.pods_per_vm;
  spec.cost_model.cost_per_unit = o.cost_per_unit;
  spec.sim.duration_s = o.duration_s;
  spec.sim.timeout_ms = o.timeout_ms;
  spec.sim.noise_sd_ms = o.noise_sd_ms;
  spec.reward_params.l_target_ms = o.target_ms;
  spec.reward_params.lambda_weight = o.lambda_initial;
  spec.reward_params.objective = cola::objective_from_string(o.objective);
  spec.reward_params.cost_model = spec.cost_model;
  spec.trainer.lambda_initial = o.lambda_initial;
  spec.trainer.lambda_max = o.lambda_max;
  spec.trainer.epsilon = o.epsilon;
  spec.trainer.f_trials = o.trials;
  spec.trainer.t_iters = o.iters;
  spec.trainer.arm_window = o.arm_window;
  spec.training_evaluator =
      o.analytic ? cola::EvaluatorKind::Analytic : cola::EvaluatorKind::Des;
  spec.master_seed = o.seed;
  if (!o.grid_text.empty())
    spec.grid = parse_grid(o.grid_text, spec.topology.endpoint_count());
  return spec;
}

int cmd_train(const CommonOpts& o, const std::string& out) {
  auto spec = build_spec(o);
  if (o.grid_text.empty())
    throw CLI::ValidationError("--grid", "training needs --grid lower:upper:step");
  auto eval = cola::make_evaluator(
      spec.training_evaluator, spec.topology, spec.cost_model, spec.sim,
      cola::mix_seed(spec.master_seed, 0x0C01A));
  cola::TrainedPolicy policy = cola::train(spec.grid, spec.trainer,
                                           spec.reward_params, *eval,
                                           spec.topology);
  cola::save_policy(policy, out);
  auto cost = cola::training_cost_report(policy, spec.sim);
  std::cout << "trained " << policy.entries.size() << " grid points, "
            << cost.total_samples << " samples, "
            << cost.simulated_time_s << " simulated seconds, "
            << cost.cost_unit_hours << " cost-unit-hours -> " << out << "\n";
  for (const auto& e : policy.entries) {
    if (!e.target_met)
      std::cout << "  warning: target unmet at dist " << e.dist_index
                << " rps " << e.rps << " (achieved " << e.achieved_latency_ms
                << " ms, final lambda " << e.final_lambda << ")\n";
  }
  return 0;
}

int cmd_evaluate(const CommonOpts& o, const std::vector<std::string>& policies,
                 const std::string& schedule_file,
                 const std::vector<double>& rps_list, double segment_s,
                 const std::string& policy_file, const std::string& cache_dir,
                 const std::string& out) {
  auto spec = build_spec(o);
  spec.out_csv = out;
  spec.cache_dir = cache_dir;
  if (!policy_file.empty()) spec.policy_file = policy_file;
  for (const auto& p : policies) spec.policies.push_back(cola::parse_policy(p));

  if (!schedule_file.empty()) {
    spec.schedule = cola::load_schedule(schedule_file);
  } else {
    auto dist = cola::uniform_distribution(spec.topology.endpoint_count());
    for (double rps : rps_list)
      spec.schedule.segments.push_back({cola::Workload{rps, dist}, segment_s});
  }

  if (spec.grid.distributions.empty()) {
    // Without an explicit grid, derive one spanning the evaluated rates so
    // cola/lr can still train.
    double lo = 1e18, hi = 0.0;
    for (const auto& seg : spec.schedule.segments) {
      lo = std::min(lo, seg.workload.total_rps);
      hi = std::max(hi, seg.workload.total_rps);
    }
    if (spec.schedule.segments.empty()) lo = hi = 100.0;
    spec.grid.rps_lower = lo;
    spec.grid.rps_upper = std::max(hi, lo);
    spec.grid.step = std::max(1.0, (hi - lo) / 4.0);
    spec.grid.distributions = {
        cola::uniform_distribution(spec.topology.endpoint_count())};
  }

  auto rows = cola::run_experiment(spec);
  std::cout << cola::results_to_csv(rows);
  if (!out.empty()) std::cout << "wrote " << out << "\n";
  return 0;
}

int cmd_oracle(const CommonOpts& o, double rps, std::uint64_t cap, int top,
               const std::string& out) {
  auto spec = build_spec(o);
  auto dist = cola::uniform_distribution(spec.topology.endpoint_count());
  cola::Workload workload{rps, dist};
  auto ranked = cola::exhaustive_oracle(
      workload, spec.topology, spec.cost_model, spec.reward_params, spec.sim,
      spec.training_evaluator, cola::mix_seed(spec.master_seed, 0x0AC1), cap);

  std::ostringstream csv;
  csv << "rank,reward,cost_units,replicas\n";
  for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(top);
       ++i) {
    csv << (i + 1) << ',' << ranked[i].second << ','
        << cola::cluster_cost(ranked[i].first, spec.topology, spec.cost_model)
        << ',' << '"';
    for (std::size_t k = 0; k < ranked[i].first.replicas.size(); ++k) {
      if (k) csv << ' ';
      csv << ranked[i].first.replicas[k];
    }
    csv << '"' << '\n';
  }
  std::cout << csv.str();
  if (!out.empty()) {
    std::ofstream f(out, std::ios::binary);
    f << csv.str();
    std::cout << "wrote " << out << "\n";
  }
  return 0;
}

int cmd_report(const CommonOpts& o, const std::string& policy_file,
               double baseline_rate, double cola_rate) {
  cola::TrainedPolicy policy = cola::load_policy(policy_file);
  cola::SimConfig sim;
  sim.duration_s = o.duration_s;
  auto report = cola::training_cost_report(policy, sim);
  std::cout << "total_samples: " << report.total_samples << "\n"
            << "simulated_time_s: " << report.simulated_time_s << "\n"
            << "cost_unit_hours: " << report.cost_unit_hours << "\n";
  if (baseline_rate > 0.0 || cola_rate > 0.0) {
    auto hours = cola::amortization_hours(report, baseline_rate, cola_rate);
    if (hours)
      std::cout << "amortization_hours: " << *hours << "\n";
    else
      std::cout << "amortization_hours: never (no savings)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microservice autoscaling sandbox: bandit-trained collective "
               "policies vs threshold and regression baselines on an M/M/c "
               "queueing simulator"};
  app.require_subcommand(1);

  CommonOpts train_opts, eval_opts, oracle_opts, report_opts;

  auto* train_cmd = app.add_subcommand("train", "train a policy over a workload grid");
  add_common(train_cmd, train_opts);
  train_cmd->add_option("--grid", train_opts.grid_text, "lower:upper:step")->required();
  std::string train_out = "policy.json";
  train_cmd->add_option("--out", train_out, "output policy JSON");

  auto* eval_cmd = app.add_subcommand("evaluate", "run policies head to head on a schedule");
  add_common(eval_cmd, eval_opts);
  eval_cmd->add_option("--grid", eval_opts.grid_text, "lower:upper:step (training grid)");
  std::vector<std::string> eval_policies;
  eval_cmd->add_option("--policy", eval_policies, "cola|cpu:<T>|lr|oracle (repeatable)")
      ->required();
  std::string eval_schedule, eval_policy_file, eval_cache, eval_out = "results.csv";
  std::vector<double> eval_rps;
  double eval_segment_s = 60.0;
  eval_cmd->add_option("--schedule", eval_schedule, "workload schedule JSON");
  eval_cmd->add_option("--rps", eval_rps, "constant-rate segments (repeatable)");
  eval_cmd->add_option("--segment-s", eval_segment_s, "duration per --rps segment");
  eval_cmd->add_option("--policy-file", eval_policy_file, "pre-trained policy JSON");
  eval_cmd->add_option("--cache-dir", eval_cache, "policy cache directory");
  eval_cmd->add_option("--out", eval_out, "output CSV");

  auto* oracle_cmd = app.add_subcommand("oracle", "exhaustively rank cluster states");
  add_common(oracle_cmd, oracle_opts);
  double oracle_rps = 100.0;
  std::uint64_t oracle_cap = 100000;
  int oracle_top = 20;
  std::string oracle_out;
  oracle_cmd->add_option("--rps", oracle_rps, "workload rate");
  oracle_cmd->add_option("--cap", oracle_cap, "state-space cap");
  oracle_cmd->add_option("--top", oracle_top, "rows to print");
  oracle_cmd->add_option("--out", oracle_out, "output CSV");

  auto* report_cmd = app.add_subcommand("report", "training cost of a policy file");
  add_common(report_cmd, report_opts);
  std::string report_policy;
  double report_baseline = 0.0, report_cola = 0.0;
  report_cmd->add_option("--policy-file", report_policy)->required();
  report_cmd->add_option("--baseline-rate", report_baseline,
                         "baseline cost units per hour");
  report_cmd->add_option("--cola-rate", report_cola, "policy cost units per hour");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return cmd_train(train_opts, train_out);
    if (eval_cmd->parsed())
      return cmd_evaluate(eval_opts, eval_policies, eval_schedule, eval_rps,
                          eval_segment_s, eval_policy_file, eval_cache, eval_out);
    if (oracle_cmd->parsed())
      return cmd_oracle(oracle_opts, oracle_rps, oracle_cap, oracle_top, oracle_out);
    if (report_cmd->parsed())
      return cmd_report(report_opts, report_policy, report_baseline, report_cola);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
