#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>

#include "cola/topology.hpp"
#include "cola/workload.hpp"
#include "support/fixtures.hpp"

using namespace cola;

TEST_CASE("cluster_cost: vm mode with one replica per vm") {
  auto topo = fixtures::single_service();
  CostModel cm;  // VmCount, pods_per_vm 1, unit 15
  CHECK(cluster_cost(ClusterState{{1}}, topo, cm) == doctest::Approx(15.0));
}

TEST_CASE("cluster_cost: pod mode sums pods") {
  auto topo = fixtures::two_service();
  CostModel cm{CostMode::PodCount, 1, 1.0};
  CHECK(cluster_cost(ClusterState{{3, 2}}, topo, cm) == doctest::Approx(5.0));
}

TEST_CASE("cluster_cost: vm mode packs pods per service") {
  auto topo = fixtures::two_service();
  CostModel cm{CostMode::VmCount, 2, 1.0};
  // ceil(3/2) + ceil(2/2) = 2 + 1
  CHECK(cluster_cost(ClusterState{{3, 2}}, topo, cm) == doctest::Approx(3.0));
}

TEST_CASE("cluster_cost: dimension mismatch throws") {
  auto topo = fixtures::two_service();
  CHECK_THROWS_AS(cluster_cost(ClusterState{{1}}, topo, CostModel{}),
                  std::invalid_argument);
}

TEST_CASE("cluster_cost is monotone in every replica count") {
  auto topo = fixtures::two_service();
  for (auto mode : {CostMode::VmCount, CostMode::PodCount}) {
    CostModel cm{mode, 2, 3.0};
    for (int a = 1; a <= 6; ++a) {
      for (int b = 1; b <= 6; ++b) {
        double base = cluster_cost(ClusterState{{a, b}}, topo, cm);
        CHECK(cluster_cost(ClusterState{{a + 1, b}}, topo, cm) >= base);
        CHECK(cluster_cost(ClusterState{{a, b + 1}}, topo, cm) >= base);
      }
    }
  }
}

TEST_CASE("arrival_rates: repeated visits count per visit") {
  AppTopology topo;
  topo.services.push_back({"A", 100.0, 10, 1});
  topo.services.push_back({"B", 100.0, 10, 1});
  topo.endpoints.push_back({"e", {"A", "B", "A"}, 0.0});
  auto rates = arrival_rates(Workload{100.0, {1.0}}, topo);
  CHECK(rates[0] == doctest::Approx(200.0));
  CHECK(rates[1] == doctest::Approx(100.0));
}

TEST_CASE("arrival_rates: zero workload gives zeros") {
  auto topo = fixtures::two_service();
  auto rates = arrival_rates(Workload{0.0, {}}, topo);
  CHECK(rates == std::vector<double>{0.0, 0.0});
}

TEST_CASE("arrival_rates: weighted visit sum over endpoints") {
  // 400 rps split 0.75 on path [A] and 0.25 on path [A, B]:
  // lambda_A = 400 * (0.75 + 0.25) = 400, lambda_B = 400 * 0.25 = 100.
  auto topo = fixtures::two_service();
  auto rates = arrival_rates(Workload{400.0, {0.75, 0.25}}, topo);
  CHECK(rates[0] == doctest::Approx(400.0));
  CHECK(rates[1] == doctest::Approx(100.0));
}

TEST_CASE("arrival_rates is linear in total rps") {
  auto topo = fixtures::two_service();
  Workload w{130.0, {0.4, 0.6}};
  Workload w2{260.0, {0.4, 0.6}};
  auto r1 = arrival_rates(w, topo);
  auto r2 = arrival_rates(w2, topo);
  for (std::size_t i = 0; i < r1.size(); ++i)
    CHECK(r2[i] == doctest::Approx(2.0 * r1[i]));
}

TEST_CASE("arrival_rates rejects a distribution that does not sum to 1") {
  auto topo = fixtures::two_service();
  CHECK_THROWS_AS(arrival_rates(Workload{100.0, {0.5, 0.4}}, topo),
                  std::invalid_argument);
}

TEST_CASE("utilizations: direct formula and overload representability") {
  auto topo = fixtures::single_service(1.0, 30);
  CHECK(utilizations(fixtures::single_workload(5.0), ClusterState{{10}},
                     topo)[0] == doctest::Approx(0.5));
  CHECK(utilizations(fixtures::single_workload(0.0), ClusterState{{10}},
                     topo)[0] == doctest::Approx(0.0));

  auto topo2 = fixtures::single_service(2.0, 30);
  CHECK(utilizations(fixtures::single_workload(12.0), ClusterState{{4}},
                     topo2)[0] == doctest::Approx(1.5));
}

TEST_CASE("utilizations strictly decrease when replicas grow under load") {
  auto topo = fixtures::single_service(10.0, 30);
  auto w = fixtures::single_workload(40.0);
  double prev = utilizations(w, ClusterState{{1}}, topo)[0];
  for (int c = 2; c <= 10; ++c) {
    double cur = utilizations(w, ClusterState{{c}}, topo)[0];
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("topology json round trip and validation") {
  auto topo = fixtures::two_service();
  auto text = topology_to_json_text(topo);
  auto back = topology_from_json_text(text);
  CHECK(back.services.size() == 2);
  CHECK(back.endpoints.size() == 2);
  CHECK(back.services[1].mu == doctest::Approx(200.0));

  CHECK_THROWS_AS(topology_from_json_text(R"({
    "services": [{"name": "a", "mu": 1.0, "max_replicas": 2}],
    "endpoints": [{"name": "e", "path": ["missing"]}]
  })"),
                  std::invalid_argument);

  CHECK_THROWS_AS(topology_from_json_text(R"({
    "services": [{"name": "a", "mu": -1.0, "max_replicas": 2}],
    "endpoints": []
  })"),
                  std::invalid_argument);
}

TEST_CASE("cost model json parsing") {
  auto cm = cost_model_from_json_text(R"({"mode": "pod", "cost_per_unit": 2.5})");
  CHECK(cm.mode == CostMode::PodCount);
  CHECK(cm.cost_per_unit == doctest::Approx(2.5));
  CHECK_THROWS_AS(cost_model_from_json_text(R"({"mode": "banana"})"),
                  std::invalid_argument);
}

TEST_CASE("state validation enforces the replica range") {
  auto topo = fixtures::single_service();
  CHECK_THROWS_AS(validate_state(ClusterState{{0}}, topo),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_state(ClusterState{{31}}, topo),
                  std::invalid_argument);
  CHECK_NOTHROW(validate_state(ClusterState{{30}}, topo));
}
