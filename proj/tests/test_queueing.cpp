#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cola/queueing.hpp"
#include "cola/topology.hpp"
#include "cola/workload.hpp"
#include "support/fixtures.hpp"
#include "support/queue_oracles.hpp"

using namespace cola;

TEST_CASE("erlang_c: M/M/1 wait probability equals rho") {
  CHECK(erlang_c({1, 0.5, 1.0}) == doctest::Approx(0.5));
}

TEST_CASE("erlang_c: c=2 hand expansion") {
  // a = 1, numerator (1/2)/(1/2) = 1, denominator 1 + 1 + 1 = 3.
  CHECK(erlang_c({2, 1.0, 1.0}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("erlang_c: empty system never waits") {
  CHECK(erlang_c({4, 0.0, 1.0}) == doctest::Approx(0.0));
}

TEST_CASE("erlang_c: unstable queue throws") {
  CHECK_THROWS_AS(erlang_c({2, 2.0, 1.0}), UnstableQueueError);
  CHECK_THROWS_AS(wq({1, 1.0, 1.0}), UnstableQueueError);
  CHECK_THROWS_AS(lq({1, 3.0, 1.0}), UnstableQueueError);
}

TEST_CASE("wq: M/M/1 closed form and c=2 case") {
  CHECK(wq({1, 0.5, 1.0}) == doctest::Approx(1.0));
  CHECK(wq({2, 1.0, 1.0}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("wq agrees with the brute-force DES oracle") {
  // c=2, rho=0.9; 10^6 arrivals.
  double analytic = wq({2, 1.8, 1.0});
  double simulated = oracle::mmc_mean_wait_des(2, 1.8, 1.0, 1000000, 1, 50000);
  CHECK(std::abs(simulated - analytic) / analytic < 0.03);
}

TEST_CASE("lq: Little's law composition") {
  CHECK(lq({1, 0.5, 1.0}) == doctest::Approx(0.5));
  CHECK(lq({3, 0.0, 1.0}) == doctest::Approx(0.0));
  CHECK(lq({2, 1.0, 1.0}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("recurrence evaluation matches naive factorials for c <= 20") {
  for (int c = 1; c <= 20; ++c) {
    for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
      double lambda = rho * c;
      double stable = wq({c, lambda, 1.0});
      double naive = oracle::wq_naive(c, lambda, 1.0);
      CHECK(std::abs(stable - naive) <= 1e-12 * std::max(1.0, std::abs(naive)));
    }
  }
}

TEST_CASE("erlang_c, wq, lq increase in lambda and decrease in c") {
  for (int c : {1, 2, 4, 8}) {
    double prev_c_prob = -1.0, prev_wq = -1.0, prev_lq = -1.0;
    for (double rho = 0.1; rho < 0.95; rho += 0.1) {
      MmcQueue q{c, rho * c, 1.0};
      CHECK(erlang_c(q) > prev_c_prob);
      CHECK(wq(q) > prev_wq);
      CHECK(lq(q) > prev_lq);
      prev_c_prob = erlang_c(q);
      prev_wq = wq(q);
      prev_lq = lq(q);
    }
  }
  for (double rho : {0.3, 0.6, 0.9}) {
    for (int c = 1; c <= 8; ++c) {
      // Same per-server utilization, more servers: less waiting.
      CHECK(wq({c + 1, rho * (c + 1), 1.0}) < wq({c, rho * c, 1.0}));
      CHECK(erlang_c({c + 1, rho * (c + 1), 1.0}) < erlang_c({c, rho * c, 1.0}));
    }
  }
}

TEST_CASE("lq is numerically convex in rho for fixed c") {
  for (int c : {1, 2, 4, 8}) {
    const int n = 50;
    const double lo = 0.01, hi = 0.95;
    const double h = (hi - lo) / (n - 1);
    std::vector<double> values;
    for (int i = 0; i < n; ++i) {
      double rho = lo + i * h;
      values.push_back(lq({c, rho * c, 1.0}));
    }
    for (int i = 1; i + 1 < n; ++i) {
      double second = values[i + 1] - 2.0 * values[i] + values[i - 1];
      CHECK(second >= -1e-9);
    }
  }
}

TEST_CASE("prop1_bound: boundary, hand value, monotonicity") {
  CHECK(prop1_bound(1, 0.0) == doctest::Approx(0.0));
  CHECK(prop1_bound(7, 0.0) == doctest::Approx(0.0));
  // c=1, rho=0.5: (0.125 + 4 + 1) * 0.25.
  CHECK(prop1_bound(1, 0.5) == doctest::Approx(1.28125));
  CHECK(prop1_bound(4, 0.9) > prop1_bound(4, 0.5));
  for (int c : {1, 2, 4, 8}) {
    double prev = -1.0;
    for (double rho = 0.0; rho < 0.99; rho += 0.01) {
      double b = prop1_bound(c, rho);
      CHECK(b > prev);
      prev = b;
    }
  }
  CHECK_THROWS_AS(prop1_bound(1, 1.0), std::domain_error);
}

TEST_CASE("prop2_ratio") {
  CHECK(prop2_ratio(250.0, 250.0) == doctest::Approx(1.0));
  CHECK(prop2_ratio(100.0, 200.0) == doctest::Approx(2.0));
  CHECK(prop2_ratio(400.0, 600.0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(prop2_ratio(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(prop2_ratio(2.0, 1.0), std::domain_error);
}

TEST_CASE("analytic_mean_latency: single M/M/1 in ms") {
  auto topo = fixtures::single_service(100.0, 30);
  auto latency =
      analytic_mean_latency(fixtures::single_workload(50.0), ClusterState{{1}},
                            topo);
  REQUIRE(latency.has_value());
  // W_q = 10 ms, service 10 ms.
  CHECK(*latency == doctest::Approx(20.0));
}

TEST_CASE("analytic_mean_latency: zero load leaves base delay plus service") {
  auto topo = fixtures::single_service(100.0, 30, 40.0);
  auto latency = analytic_mean_latency(fixtures::single_workload(0.0),
                                       ClusterState{{1}}, topo);
  REQUIRE(latency.has_value());
  CHECK(*latency == doctest::Approx(50.0));
}

TEST_CASE("analytic_mean_latency: overload on a used path is a marker") {
  auto topo = fixtures::single_service(100.0, 30);
  CHECK_FALSE(analytic_mean_latency(fixtures::single_workload(150.0),
                                    ClusterState{{1}}, topo)
                  .has_value());
}

TEST_CASE("analytic_mean_latency: repeated visits accumulate") {
  AppTopology topo;
  topo.services.push_back({"A", 100.0, 10, 1});
  topo.endpoints.push_back({"e", {"A", "A"}, 0.0});
  // Each visit sees lambda = 100 on c=4: sojourn per visit wq + 10 ms.
  auto latency =
      analytic_mean_latency(Workload{50.0, {1.0}}, ClusterState{{4}}, topo);
  REQUIRE(latency.has_value());
  double per_visit = wq({4, 100.0, 100.0}) * 1000.0 + 10.0;
  CHECK(*latency == doctest::Approx(2.0 * per_visit));
}

TEST_CASE("analytic_mean_latency: overloaded service on an unused path is fine") {
  auto topo = fixtures::two_service();  // e1: [a], e2: [a, b]
  // All mass on e1; b idle even with 1 replica.
  auto latency =
      analytic_mean_latency(Workload{80.0, {1.0, 0.0}}, ClusterState{{20, 1}},
                            topo);
  CHECK(latency.has_value());
}
