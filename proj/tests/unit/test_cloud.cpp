#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gscale/cloud.hpp"
#include "gscale/error.hpp"

using namespace gscale;

TEST_CASE("execution_time") {
  CHECK(execution_time(100, 1) == 100.0);
  CHECK(execution_time(100, 4) == 25.0);
  // 37/3 rounded once: the nearest double to the rational value
  CHECK(execution_time(37, 3) == 37.0 / 3.0);
  CHECK(execution_time(37, 3) == doctest::Approx(12.333333333333334).epsilon(1e-15));
  CHECK_THROWS_AS(execution_time(0, 1), DomainError);
  CHECK_THROWS_AS(execution_time(-5, 1), DomainError);
  CHECK_THROWS_AS(execution_time(10, 0), DomainError);

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> et(1, 500), k(0.1, 10);
  for (int i = 0; i < 200; ++i) {
    const double e = et(gen), s = k(gen);
    const int c = 1 + static_cast<int>(gen() % 16);
    CHECK(execution_time(s * e, c) == doctest::Approx(s * execution_time(e, c)).epsilon(1e-12));
  }
}

TEST_CASE("vm_cost") {
  CHECK(vm_cost(0.192, 0, 3600) == doctest::Approx(0.192).epsilon(1e-12));
  CHECK(vm_cost(0.768, 1000, 1000) == 0.0);
  CHECK(vm_cost(2.304, 0, 5400) == doctest::Approx(3.456).epsilon(1e-12));
  CHECK_THROWS_AS(vm_cost(0.192, 10, 5), DomainError);
}

TEST_CASE("total_cost") {
  CHECK(total_cost(std::vector<VmRental>{}) == 0.0);
  std::vector<VmRental> two = {{0.192, 0.0, 3600.0}, {0.192, 100.0, 3700.0}};
  CHECK(total_cost(two) == doctest::Approx(0.384).epsilon(1e-12));
  std::vector<VmRental> floor(3, VmRental{0.768, 0.0, 86400.0});
  CHECK(total_cost(floor) == doctest::Approx(55.296).epsilon(1e-12));
  std::vector<VmRental> idle = {{0.768, std::nullopt, std::nullopt}, {0.192, 0.0, 3600.0}};
  CHECK(total_cost(idle) == doctest::Approx(0.192).epsilon(1e-12));

  // permutation invariance and additivity
  std::vector<VmRental> a = {{0.192, 0.0, 100.0}, {1.536, 50.0, 900.0}};
  std::vector<VmRental> b = {{2.304, 0.0, 7200.0}};
  std::vector<VmRental> ab = {a[1], b[0], a[0]};
  CHECK(total_cost(ab) == doctest::Approx(total_cost(a) + total_cost(b)).epsilon(1e-12));
}

TEST_CASE("average_response_time") {
  CHECK_FALSE(average_response_time(std::vector<double>{}).has_value());
  CHECK(*average_response_time(std::vector<double>{300}) == 300.0);
  CHECK(*average_response_time(std::vector<double>{100, 200, 300}) == 200.0);

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> rt(1, 5000);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = rt(gen);
  // Welford streaming mean as the oracle
  double mean = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) mean += (xs[i] - mean) / static_cast<double>(i + 1);
  CHECK(*average_response_time(xs) == doctest::Approx(mean).epsilon(1e-9));
}

TEST_CASE("objective") {
  BudgetPolicy p;
  CHECK(objective(300, 150, p) == -300.0);
  CHECK(objective(300, 250, p) == -5300.0);
  CHECK(objective(300, 200, p) == -300.0);
  // non-increasing in art and cost
  for (double c = 0; c < 400; c += 7.5) {
    CHECK(objective(100, c, p) >= objective(100, c + 1, p));
    CHECK(objective(c, 220, p) >= objective(c + 1, 220, p));
  }
}

TEST_CASE("violation_degree") {
  CHECK(violation_degree(200, 200) == 0.0);
  CHECK(violation_degree(220, 200) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(violation_degree(515.16, 200) == doctest::Approx(157.58).epsilon(1e-9));
  CHECK(violation_degree(199.99, 200) == 0.0);
  CHECK(violation_degree(200.01, 200) > 0.0);
  CHECK_THROWS_AS(violation_degree(10, 0), DomainError);
}

TEST_CASE("vm catalog") {
  const auto cat = default_vm_catalog();
  REQUIRE(cat.size() == 5);
  const std::vector<std::tuple<std::string, int, double, double>> want = {
      {"m5.xlarge", 4, 16, 0.192},
      {"m5.2xlarge", 8, 32, 0.384},
      {"m5.4xlarge", 16, 64, 0.768},
      {"m5.8xlarge", 32, 128, 1.536},
      {"m5.12xlarge", 48, 192, 2.304}};
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(cat[i].name == std::get<0>(want[i]));
    CHECK(cat[i].vcpu == std::get<1>(want[i]));
    CHECK(cat[i].mem_gib == std::get<2>(want[i]));
    CHECK(cat[i].usd_per_hour == std::get<3>(want[i]));
  }
  CHECK(find_vm_type(cat, "m5.8xlarge").vcpu == 32);
  CHECK_THROWS(find_vm_type(cat, "t2.micro"));
  const auto back = vm_catalog_from_json(vm_catalog_to_json(cat));
  REQUIRE(back.size() == cat.size());
  CHECK(back[2].usd_per_hour == cat[2].usd_per_hour);
}

TEST_CASE("AppSpec validation and structure") {
  AppSpec diamond("d", {{0, 10}, {1, 20}, {2, 30}, {3, 5}}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  CHECK(diamond.sources() == std::vector<int>{0});
  CHECK(diamond.sinks() == std::vector<int>{3});
  CHECK(diamond.topological_order() == std::vector<int>{0, 1, 2, 3});
  CHECK(diamond.critical_path_ms() == 45.0);
  CHECK(diamond.has_edge(0, 2));
  CHECK_FALSE(diamond.has_edge(2, 0));
  CHECK(diamond.predecessors(3) == std::vector<int>{1, 2});

  CHECK_THROWS(AppSpec("cyc", {{0, 1}, {1, 1}}, {{0, 1}, {1, 0}}));
  CHECK_THROWS(AppSpec("self", {{0, 1}}, {{0, 0}}));
  CHECK_THROWS(AppSpec("dup", {{0, 1}, {1, 1}}, {{0, 1}, {0, 1}}));
  CHECK_THROWS(AppSpec("et", {{0, 0}}, {}));
  CHECK_THROWS(AppSpec("ids", {{0, 1}, {2, 1}}, {}));
  CHECK_THROWS(AppSpec("edge", {{0, 1}}, {{0, 5}}));

  const AppSpec back = AppSpec::from_json(diamond.to_json());
  CHECK(back.name() == "d");
  CHECK(back.edges() == diamond.edges());
  CHECK(back.et_ms(2) == 30.0);
  CHECK_THROWS_AS(AppSpec::from_json(nlohmann::json{{"name", "x"}}), ParseError);
}

TEST_CASE("BudgetPolicy validation") {
  BudgetPolicy p;
  CHECK_NOTHROW(p.validate());
  p.budget_usd = 0;
  CHECK_THROWS(p.validate());
  p.budget_usd = 10;
  p.rho = -1;
  CHECK_THROWS(p.validate());
}
