#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cola {

// Aggregate request rate plus how that rate splits across endpoints. The
// context vector used elsewhere is total_rps * endpoint_probs elementwise;
// keeping the normalized form makes distribution distances scale-free.
struct Workload {
  double total_rps = 0.0;
  std::vector<double> endpoint_probs;
};

// Training grid: an RPS range sampled uniformly by step, crossed with a set
// of request distributions.
struct WorkloadGrid {
  double rps_lower = 0.0;
  double rps_upper = 0.0;
  double step = 0.0;
  std::vector<std::vector<double>> distributions;
};

struct WorkloadSchedule {
  struct Segment {
    Workload workload;
    double duration_s = 0.0;
  };
  std::vector<Segment> segments;

  double total_duration_s() const;
};

// Throws std::invalid_argument on violation. The distribution must sum to 1
// within 1e-9 unless total_rps is 0 (idle workload, distribution unused).
void validate_workload(const Workload& w, int endpoint_count);
void validate_grid(const WorkloadGrid& g, int endpoint_count);

// Uniform distribution over n endpoints.
std::vector<double> uniform_distribution(int n);

// RPS sample points lower, lower+step, ... while <= upper (+ tiny slack for
// float steps).
std::vector<double> grid_rps_values(const WorkloadGrid& g);

// Cartesian product of RPS values and distributions, grouped by distribution
// and ascending in RPS within each group. The ordering feeds warm starting.
std::vector<Workload> grid_points(const WorkloadGrid& g);

// Largest ratio between adjacent RPS values in the grid; the worst-case
// multiplicative queueing-delay inflation an interpolating policy can incur
// (see prop2_ratio). Returns 1 for single-point grids.
double max_adjacent_rps_ratio(const WorkloadGrid& g);

// Schedule generators for the four evaluation shapes.
WorkloadSchedule constant_rate(double rps, const std::vector<double>& dist,
                               double duration_s);

// True when rates increase to a single peak then decrease.
bool is_unimodal(const std::vector<double>& rates);

// One segment per rate, in order. Warns on stderr when the rate sequence is
// not unimodal.
WorkloadSchedule diurnal(const std::vector<double>& rates,
                         const std::vector<double>& dist,
                         double segment_duration_s);

// 2*n_cycles segments alternating low/high, each rate drawn uniformly from
// its [lo, hi] range with the given seed.
WorkloadSchedule alternating(double high_lo, double high_hi, double low_lo,
                             double low_hi, int n_cycles,
                             double segment_duration_s, std::uint64_t seed,
                             const std::vector<double>& dist);

// Multiplies one endpoint's mass by factor and renormalizes.
std::vector<double> perturb_distribution(const std::vector<double>& dist,
                                         double factor, int endpoint_index);

// Pool two workloads into one arrival process (used to overlay background
// load): rates add, distributions mix by rate.
Workload combine_workloads(const Workload& a, const Workload& b);

// JSON I/O: {"segments": [{"rps", "probs", "duration_s"}, ...]}
WorkloadSchedule schedule_from_json_text(const std::string& text);
WorkloadSchedule load_schedule(const std::string& path);
std::string schedule_to_json_text(const WorkloadSchedule& sched);
void save_schedule(const WorkloadSchedule& sched, const std::string& path);

}  // namespace cola
