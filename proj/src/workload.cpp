#include "cola/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "cola/rng.hpp"
#include "json.hpp"

namespace cola {

namespace {

constexpr double kProbSumTolerance = 1e-9;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

void validate_distribution(const std::vector<double>& probs, int endpoint_count,
                           const std::string& what) {
  if (endpoint_count >= 0 &&
      probs.size() != static_cast<std::size_t>(endpoint_count))
    fail(what + ": " + std::to_string(probs.size()) + " probabilities for " +
         std::to_string(endpoint_count) + " endpoints");
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0) fail(what + ": negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbSumTolerance)
    fail(what + ": probabilities sum to " + std::to_string(sum));
}

}  // namespace

double WorkloadSchedule::total_duration_s() const {
  double total = 0.0;
  for (const auto& seg : segments) total += seg.duration_s;
  return total;
}

void validate_workload(const Workload& w, int endpoint_count) {
  if (w.total_rps < 0.0) fail("workload: negative total_rps");
  if (w.total_rps == 0.0) return;  // distribution irrelevant when idle
  validate_distribution(w.endpoint_probs, endpoint_count, "workload");
}

void validate_grid(const WorkloadGrid& g, int endpoint_count) {
  if (g.rps_lower > g.rps_upper) fail("grid: rps_lower > rps_upper");
  if (!(g.step > 0.0)) fail("grid: step must be > 0");
  if (g.distributions.empty()) fail("grid: no request distributions");
  for (const auto& d : g.distributions)
    validate_distribution(d, endpoint_count, "grid distribution");
}

std::vector<double> uniform_distribution(int n) {
  if (n <= 0) fail("uniform_distribution: need at least one endpoint");
  return std::vector<double>(n, 1.0 / n);
}

std::vector<double> grid_rps_values(const WorkloadGrid& g) {
  if (g.rps_lower > g.rps_upper) fail("grid: empty RPS range");
  if (!(g.step > 0.0)) fail("grid: step must be > 0");
  std::vector<double> values;
  double slack = g.step * 1e-9;
  for (double r = g.rps_lower; r <= g.rps_upper + slack; r += g.step)
    values.push_back(std::min(r, g.rps_upper));
  return values;
}

std::vector<Workload> grid_points(const WorkloadGrid& g) {
  validate_grid(g, -1);
  auto rps = grid_rps_values(g);
  std::vector<Workload> points;
  points.reserve(rps.size() * g.distributions.size());
  for (const auto& dist : g.distributions) {
    for (double r : rps) points.push_back(Workload{r, dist});
  }
  return points;
}

double max_adjacent_rps_ratio(const WorkloadGrid& g) {
  auto rps = grid_rps_values(g);
  double worst = 1.0;
  for (std::size_t i = 1; i < rps.size(); ++i) {
    if (rps[i - 1] > 0.0) worst = std::max(worst, rps[i] / rps[i - 1]);
  }
  return worst;
}

WorkloadSchedule constant_rate(double rps, const std::vector<double>& dist,
                               double duration_s) {
  if (duration_s <= 0.0) fail("constant_rate: duration must be > 0");
  WorkloadSchedule sched;
  sched.segments.push_back({Workload{rps, dist}, duration_s});
  return sched;
}

bool is_unimodal(const std::vector<double>& rates) {
  std::size_t i = 1;
  while (i < rates.size() && rates[i] >= rates[i - 1]) ++i;
  while (i < rates.size() && rates[i] <= rates[i - 1]) ++i;
  return i == rates.size();
}

WorkloadSchedule diurnal(const std::vector<double>& rates,
                         const std::vector<double>& dist,
                         double segment_duration_s) {
  if (rates.empty()) fail("diurnal: no rates");
  if (segment_duration_s <= 0.0) fail("diurnal: duration must be > 0");
  if (!is_unimodal(rates))
    std::cerr << "warning: diurnal rate sequence is not increase-then-decrease"
              << std::endl;
  WorkloadSchedule sched;
  for (double r : rates)
    sched.segments.push_back({Workload{r, dist}, segment_duration_s});
  return sched;
}

WorkloadSchedule alternating(double high_lo, double high_hi, double low_lo,
                             double low_hi, int n_cycles,
                             double segment_duration_s, std::uint64_t seed,
                             const std::vector<double>& dist) {
  if (high_lo > high_hi || low_lo > low_hi) fail("alternating: bad rate range");
  if (n_cycles <= 0) fail("alternating: need at least one cycle");
  if (segment_duration_s <= 0.0) fail("alternating: duration must be > 0");
  Rng rng(seed);
  WorkloadSchedule sched;
  for (int i = 0; i < n_cycles; ++i) {
    double low = rng.uniform(low_lo, low_hi);
    double high = rng.uniform(high_lo, high_hi);
    sched.segments.push_back({Workload{low, dist}, segment_duration_s});
    sched.segments.push_back({Workload{high, dist}, segment_duration_s});
  }
  return sched;
}

std::vector<double> perturb_distribution(const std::vector<double>& dist,
                                         double factor, int endpoint_index) {
  validate_distribution(dist, -1, "perturb_distribution");
  if (factor < 0.0) fail("perturb_distribution: negative factor");
  if (endpoint_index < 0 ||
      endpoint_index >= static_cast<int>(dist.size()))
    fail("perturb_distribution: endpoint index out of range");
  std::vector<double> out = dist;
  out[endpoint_index] *= factor;
  double sum = 0.0;
  for (double p : out) sum += p;
  if (sum == 0.0) fail("perturb_distribution: all mass removed");
  for (double& p : out) p /= sum;
  return out;
}

Workload combine_workloads(const Workload& a, const Workload& b) {
  double total = a.total_rps + b.total_rps;
  if (total == 0.0) return Workload{0.0, a.endpoint_probs};
  std::size_t n = std::max(a.endpoint_probs.size(), b.endpoint_probs.size());
  std::vector<double> probs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double mass = 0.0;
    if (a.total_rps > 0.0 && i < a.endpoint_probs.size())
      mass += a.total_rps * a.endpoint_probs[i];
    if (b.total_rps > 0.0 && i < b.endpoint_probs.size())
      mass += b.total_rps * b.endpoint_probs[i];
    probs[i] = mass / total;
  }
  return Workload{total, std::move(probs)};
}

WorkloadSchedule schedule_from_json_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  WorkloadSchedule sched;
  for (const auto& js : j.at("segments")) {
    WorkloadSchedule::Segment seg;
    seg.workload.total_rps = js.at("rps").get<double>();
    seg.workload.endpoint_probs = js.at("probs").get<std::vector<double>>();
    seg.duration_s = js.at("duration_s").get<double>();
    if (seg.duration_s <= 0.0) fail("schedule: segment duration must be > 0");
    validate_workload(seg.workload, -1);
    sched.segments.push_back(std::move(seg));
  }
  return sched;
}

WorkloadSchedule load_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open schedule file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return schedule_from_json_text(ss.str());
  } catch (const std::exception& ex) {
    fail(path + ": " + ex.what());
  }
}

std::string schedule_to_json_text(const WorkloadSchedule& sched) {
  nlohmann::json j;
  j["segments"] = nlohmann::json::array();
  for (const auto& seg : sched.segments) {
    j["segments"].push_back({{"rps", seg.workload.total_rps},
                             {"probs", seg.workload.endpoint_probs},
                             {"duration_s", seg.duration_s}});
  }
  return j.dump(2);
}

void save_schedule(const WorkloadSchedule& sched, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write schedule file: " + path);
  out << schedule_to_json_text(sched) << "\n";
}

}  // namespace cola
