#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>

#include "cola/queueing.hpp"
#include "cola/workload.hpp"

using namespace cola;

TEST_CASE("grid_points: uniform RPS sampling over one distribution") {
  WorkloadGrid g{100.0, 1000.0, 100.0, {{1.0}}};
  auto points = grid_points(g);
  REQUIRE(points.size() == 10);
  for (int i = 0; i < 10; ++i)
    CHECK(points[i].total_rps == doctest::Approx(100.0 * (i + 1)));
}

TEST_CASE("grid_points: degenerate single point") {
  WorkloadGrid g{200.0, 200.0, 50.0, {{1.0}}};
  auto points = grid_points(g);
  REQUIRE(points.size() == 1);
  CHECK(points[0].total_rps == doctest::Approx(200.0));
}

TEST_CASE("grid_points: product with distributions, ascending per group") {
  WorkloadGrid g{100.0, 300.0, 100.0, {{1.0, 0.0}, {0.5, 0.5}}};
  auto points = grid_points(g);
  REQUIRE(points.size() == 6);
  CHECK(points[0].endpoint_probs == std::vector<double>{1.0, 0.0});
  CHECK(points[3].endpoint_probs == std::vector<double>{0.5, 0.5});
  for (int base : {0, 3}) {
    CHECK(points[base].total_rps < points[base + 1].total_rps);
    CHECK(points[base + 1].total_rps < points[base + 2].total_rps);
  }
}

TEST_CASE("grid_points: empty range throws") {
  WorkloadGrid g{500.0, 100.0, 100.0, {{1.0}}};
  CHECK_THROWS_AS(grid_points(g), std::invalid_argument);
}

TEST_CASE("grid spacing links to the interpolation delay budget") {
  WorkloadGrid g{100.0, 1000.0, 100.0, {{1.0}}};
  double worst = max_adjacent_rps_ratio(g);
  CHECK(worst == doctest::Approx(2.0));  // 200/100 dominates
  // A user holding a 2x delay budget can check the grid against prop2_ratio.
  auto rps = grid_rps_values(g);
  for (std::size_t i = 1; i < rps.size(); ++i)
    CHECK(prop2_ratio(rps[i - 1], rps[i]) <= worst + 1e-12);
}

TEST_CASE("constant_rate") {
  auto sched = constant_rate(400.0, {1.0}, 600.0);
  REQUIRE(sched.segments.size() == 1);
  CHECK(sched.segments[0].workload.total_rps == doctest::Approx(400.0));
  CHECK(sched.segments[0].duration_s == doctest::Approx(600.0));

  auto idle = constant_rate(0.0, {1.0}, 60.0);
  CHECK(idle.segments[0].workload.total_rps == doctest::Approx(0.0));

  // Concatenation is the harness's job.
  WorkloadSchedule combined = constant_rate(100.0, {1.0}, 60.0);
  auto more = constant_rate(200.0, {1.0}, 60.0);
  combined.segments.insert(combined.segments.end(), more.segments.begin(),
                           more.segments.end());
  CHECK(combined.segments.size() == 2);
  CHECK(combined.total_duration_s() == doctest::Approx(120.0));
}

TEST_CASE("diurnal keeps order and duration") {
  auto sched = diurnal({100.0, 200.0, 300.0, 150.0}, {1.0}, 900.0);
  REQUIRE(sched.segments.size() == 4);
  CHECK(sched.total_duration_s() == doctest::Approx(3600.0));
  CHECK(sched.segments[2].workload.total_rps == doctest::Approx(300.0));

  auto single = diurnal({250.0}, {1.0}, 60.0);
  CHECK(single.segments.size() == 1);
}

TEST_CASE("unimodality check") {
  CHECK(is_unimodal({1.0, 3.0, 2.0}));
  CHECK(is_unimodal({1.0, 2.0, 3.0}));
  CHECK(is_unimodal({3.0, 2.0, 1.0}));
  CHECK(is_unimodal({2.0}));
  CHECK_FALSE(is_unimodal({1.0, 3.0, 2.0, 4.0}));
}

TEST_CASE("alternating: seeded cycles in low/high order") {
  auto sched = alternating(500.0, 600.0, 100.0, 200.0, 1, 60.0, 7, {1.0});
  REQUIRE(sched.segments.size() == 2);
  CHECK(sched.segments[0].workload.total_rps <= 200.0);
  CHECK(sched.segments[1].workload.total_rps >= 500.0);

  auto again = alternating(500.0, 600.0, 100.0, 200.0, 1, 60.0, 7, {1.0});
  CHECK(again.segments[0].workload.total_rps ==
        doctest::Approx(sched.segments[0].workload.total_rps));
  CHECK(again.segments[1].workload.total_rps ==
        doctest::Approx(sched.segments[1].workload.total_rps));

  auto degenerate = alternating(500.0, 500.0, 100.0, 100.0, 2, 60.0, 9, {1.0});
  REQUIRE(degenerate.segments.size() == 4);
  CHECK(degenerate.segments[1].workload.total_rps == doctest::Approx(500.0));
  CHECK(degenerate.segments[3].workload.total_rps == doctest::Approx(500.0));
}

TEST_CASE("perturb_distribution") {
  auto tripled = perturb_distribution({0.5, 0.5}, 3.0, 0);
  CHECK(tripled[0] == doctest::Approx(0.75));
  CHECK(tripled[1] == doctest::Approx(0.25));

  auto unchanged = perturb_distribution({0.3, 0.7}, 1.0, 1);
  CHECK(unchanged[0] == doctest::Approx(0.3));
  CHECK(unchanged[1] == doctest::Approx(0.7));

  auto removed = perturb_distribution({0.5, 0.25, 0.25}, 0.0, 0);
  CHECK(removed[0] == doctest::Approx(0.0));
  CHECK(removed[1] == doctest::Approx(0.5));
  CHECK(removed[2] == doctest::Approx(0.5));

  CHECK_THROWS_AS(perturb_distribution({0.5, 0.5}, -1.0, 0),
                  std::invalid_argument);
}

TEST_CASE("generated distributions stay normalized") {
  auto dists = {perturb_distribution({0.2, 0.3, 0.5}, 2.7, 1),
                perturb_distribution({0.2, 0.3, 0.5}, 0.1, 2),
                uniform_distribution(7)};
  for (const auto& d : dists) {
    double sum = 0.0;
    for (double p : d) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("schedule json round trip") {
  auto sched = diurnal({100.0, 300.0, 200.0}, {0.25, 0.75}, 120.0);
  auto text = schedule_to_json_text(sched);
  auto back = schedule_from_json_text(text);
  REQUIRE(back.segments.size() == 3);
  CHECK(back.segments[1].workload.total_rps == doctest::Approx(300.0));
  CHECK(back.segments[1].workload.endpoint_probs[1] == doctest::Approx(0.75));
  CHECK(back.segments[2].duration_s == doctest::Approx(120.0));

  CHECK_THROWS_AS(
      schedule_from_json_text(
          R"({"segments": [{"rps": 10, "probs": [1.0], "duration_s": 0}]})"),
      std::invalid_argument);
}

TEST_CASE("combine_workloads mixes by rate") {
  auto combined = combine_workloads(Workload{100.0, {1.0, 0.0}},
                                    Workload{300.0, {0.0, 1.0}});
  CHECK(combined.total_rps == doctest::Approx(400.0));
  CHECK(combined.endpoint_probs[0] == doctest::Approx(0.25));
  CHECK(combined.endpoint_probs[1] == doctest::Approx(0.75));
}
