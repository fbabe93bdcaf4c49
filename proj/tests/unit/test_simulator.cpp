#include <doctest.h>

#include <random>

#include "gscale/error.hpp"
#include "helpers.hpp"

using namespace gscale;
using testutil::bare_state;
using testutil::chain_app;
using testutil::vm_type;

namespace {

std::shared_ptr<const AppSpec> flat_app(int n) {
  std::vector<Microservice> ms;
  for (int i = 0; i < n; ++i) ms.push_back({i, 50.0});
  return std::make_shared<const AppSpec>("flat", ms, std::vector<std::pair<int, int>>{});
}

std::vector<int> dispatch_counts(const std::vector<std::int64_t>& weights, int n) {
  std::vector<std::int64_t> current(weights.size(), 0);
  std::vector<int> counts(weights.size(), 0);
  for (int k = 0; k < n; ++k) ++counts[smooth_wrr_pick(weights, current)];
  return counts;
}

}  // namespace

TEST_CASE("init_scenario") {
  ScenarioConfig cfg;
  CloudState s = init_scenario(flat_app(11), cfg);
  CHECK(s.vms().size() == 3);
  CHECK(s.container_list().size() == 11);
  std::vector<int> per_vm;
  for (const auto& [id, vm] : s.vms()) per_vm.push_back(s.vm_used(id));
  CHECK(per_vm == std::vector<int>{4, 4, 3});
  for (const auto& [id, c] : s.containers()) CHECK(c.vcpu == 1);
  CHECK(s.clock() == 0.0);
  CHECK_NOTHROW(s.check_invariants());

  ScenarioConfig one = cfg;
  one.initial_vm_count = 1;
  CloudState s1 = init_scenario(flat_app(3), one);
  CHECK(s1.vms().size() == 1);
  CHECK(s1.vm_used(s1.vms().begin()->first) == 3);

  CHECK_NOTHROW(init_scenario(flat_app(40), cfg));
  CHECK_THROWS_AS(init_scenario(flat_app(50), cfg), ConfigError);
  ScenarioConfig bad = cfg;
  bad.initial_vm_type = "nope";
  CHECK_THROWS(init_scenario(flat_app(3), bad));
}

TEST_CASE("cwrr_weights") {
  CHECK(cwrr_weights(std::vector<int>{2, 2}) == std::vector<double>{0.5, 0.5});
  CHECK(cwrr_weights(std::vector<int>{4}) == std::vector<double>{1.0});
  CHECK(cwrr_weights(std::vector<int>{1, 2, 5}) == std::vector<double>{0.125, 0.25, 0.625});
  CHECK_THROWS(cwrr_weights(std::vector<int>{}));
}

TEST_CASE("smooth weighted round-robin") {
  CHECK(dispatch_counts({1, 1}, 4) == std::vector<int>{2, 2});
  CHECK(dispatch_counts({4}, 9) == std::vector<int>{9});
  CHECK(dispatch_counts({1, 3}, 8) == std::vector<int>{2, 6});

  // every prefix stays within one task of the proportional share
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(gen() % 8);
    std::vector<std::int64_t> w(k);
    std::int64_t total = 0;
    for (auto& x : w) total += (x = 1 + static_cast<std::int64_t>(gen() % 16));
    std::vector<std::int64_t> current(k, 0);
    std::vector<int> counts(k, 0);
    for (int n = 1; n <= 300; ++n) {
      ++counts[smooth_wrr_pick(w, current)];
      for (int j = 0; j < k; ++j) CHECK(std::abs(counts[j] - n * static_cast<double>(w[j]) / total) < 1.0);
    }
  }
}

TEST_CASE("dispatch uses capacity weights") {
  CloudState s = bare_state(chain_app({100}));
  const VmId vm = s.rent_vm(vm_type("m5.4xlarge"), 0);
  const ContainerId a = s.create_container(0, 1, vm, true);
  const ContainerId b = s.create_container(0, 3, vm, true);
  std::vector<int> counts(2, 0);
  for (int k = 0; k < 8; ++k) {
    auto id = s.dispatch_task(TaskRef{-1, 0, 0.0});
    REQUIRE(id.has_value());
    ++counts[*id == a ? 0 : 1];
  }
  CHECK(counts == std::vector<int>{2, 6});
  CHECK(b != a);
}

TEST_CASE("response times") {
  SUBCASE("single task") {
    CloudState s = bare_state(chain_app({100}));
    s.create_container(0, 1, s.rent_vm(vm_type("m5.xlarge"), 0), true);
    s.schedule_arrival(0.0);
    s.advance(10.0);
    CHECK(s.responses_ms() == std::vector<double>{100.0});
  }
  SUBCASE("chain of two") {
    CloudState s = bare_state(chain_app({100, 100}));
    const VmId vm = s.rent_vm(vm_type("m5.xlarge"), 0);
    s.create_container(0, 1, vm, true);
    s.create_container(1, 1, vm, true);
    s.schedule_arrival(0.0);
    s.advance(10.0);
    REQUIRE(s.responses_ms().size() == 1);
    CHECK(s.responses_ms()[0] == doctest::Approx(200.0));
  }
  SUBCASE("FIFO wait") {
    CloudState s = bare_state(chain_app({100}));
    s.create_container(0, 1, s.rent_vm(vm_type("m5.xlarge"), 0), true);
    s.schedule_arrival(0.0);
    s.schedule_arrival(0.0);
    s.advance(10.0);
    REQUIRE(s.responses_ms().size() == 2);
    CHECK(s.responses_ms()[0] == doctest::Approx(100.0));
    CHECK(s.responses_ms()[1] == doctest::Approx(200.0));
  }
  SUBCASE("join waits for the slowest branch") {
    auto app = std::make_shared<const AppSpec>(
        "diamond", std::vector<Microservice>{{0, 10}, {1, 40}, {2, 100}, {3, 20}},
        std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    CloudState s = bare_state(app);
    const VmId vm = s.rent_vm(vm_type("m5.xlarge"), 0);
    for (int ms = 0; ms < 4; ++ms) s.create_container(ms, 1, vm, true);
    s.schedule_arrival(0.0);
    s.advance(10.0);
    REQUIRE(s.responses_ms().size() == 1);
    CHECK(s.responses_ms()[0] == doctest::Approx(app->critical_path_ms()));
  }
  SUBCASE("more vCPUs run faster") {
    CloudState s = bare_state(chain_app({100}));
    s.create_container(0, 4, s.rent_vm(vm_type("m5.xlarge"), 0), true);
    s.schedule_arrival(0.0);
    s.advance(10.0);
    CHECK(s.responses_ms()[0] == doctest::Approx(25.0));
  }
}

TEST_CASE("vertical delay: tasks that start early use the old capacity") {
  CloudState s = bare_state(chain_app({100}), TransientConfig{0.0, 10.0});
  const ContainerId c = s.create_container(0, 1, s.rent_vm(vm_type("m5.xlarge"), 0), true);
  s.resize_container(c, 2);
  CHECK(s.container(c).vcpu == 2);
  CHECK(s.container(c).effective_vcpu == 1);
  CHECK(s.vm_used(s.container(c).vm) == 2);
  s.schedule_arrival(1.0);
  s.schedule_arrival(20.0);
  s.advance(30.0);
  REQUIRE(s.responses_ms().size() == 2);
  CHECK(s.responses_ms()[0] == doctest::Approx(100.0));
  CHECK(s.responses_ms()[1] == doctest::Approx(50.0));
  CHECK(s.container(c).effective_vcpu == 2);
}

TEST_CASE("shrink keeps the old reservation until it takes effect") {
  CloudState s = bare_state(chain_app({100}), TransientConfig{0.0, 10.0});
  const VmId vm = s.rent_vm(vm_type("m5.xlarge"), 0);
  const ContainerId c = s.create_container(0, 4, vm, true);
  s.resize_container(c, 1);
  CHECK(s.vm_remaining(vm) == 0);
  s.advance(11.0);
  CHECK(s.vm_remaining(vm) == 3);
}

TEST_CASE("horizontal delay: a starting replica gets no work while another is ready") {
  CloudState s = bare_state(chain_app({10}), TransientConfig{180.0, 0.0});
  const VmId vm = s.rent_vm(vm_type("m5.4xlarge"), 0);
  const ContainerId ready = s.create_container(0, 1, vm, true);
  const ContainerId fresh = s.create_container(0, 4, vm);
  CHECK_FALSE(s.container(fresh).ready(s.clock()));
  for (int k = 0; k < 50; ++k) s.schedule_arrival(k * 3.0);
  s.advance(180.0);
  CHECK(s.container(fresh).pending() == 0);
  CHECK(s.container(fresh).window.served == 0);
  CHECK(s.container(ready).window.served == 50);
}

TEST_CASE("env_step no-op with zero arrivals only moves the clock") {
  CloudState s = init_scenario(chain_app({100, 100}), ScenarioConfig{});
  const auto before = s.containers().size();
  StepMetrics m = env_step(s, 0, ScalingAction{0, 0}, {});
  CHECK(s.clock() == 180.0);
  CHECK(s.containers().size() == before);
  CHECK(m.kind == OpKind::NoOp);
  CHECK(m.admitted == 0);
  CHECK(m.step_art_ms == 0.0);
  CHECK(m.noop_steps == 1);
}

TEST_CASE("invalid index degrades to a flagged no-op") {
  CloudState s = init_scenario(chain_app({100, 100}), ScenarioConfig{});
  StepMetrics m = env_step(s, 0, ScalingAction{7, 2}, {});
  CHECK(m.invalid_action);
  CHECK(m.kind == OpKind::NoOp);
  StepMetrics m2 = env_step(s, 1, ScalingAction{0, 9}, {});
  CHECK(m2.invalid_action);
}

TEST_CASE("conservation, capacity and determinism under random actions") {
  auto app = chain_app({120, 200, 80, 150, 100});
  auto run = [&](std::uint64_t seed) {
    ScenarioConfig cfg;
    CloudState s = init_scenario(app, cfg);
    std::mt19937_64 gen(seed);
    std::vector<StepMetrics> out;
    for (int step = 0; step < 20; ++step) {
      const int c = static_cast<int>(s.container_list().size());
      ScalingAction a{static_cast<int>(gen() % c), static_cast<int>(gen() % 9) - 4};
      std::vector<double> arrivals;
      const int n = static_cast<int>(gen() % 400);
      for (int k = 0; k < n; ++k) arrivals.push_back(step * 180.0 + k * 180.0 / n);
      out.push_back(env_step(s, step, a, arrivals));
      s.check_invariants();
      const Counters& k = s.counters();
      CHECK(k.admitted == k.completed + s.in_flight() + k.rejected);
    }
    return out;
  };
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) CHECK(run(seed) == run(seed));
}

TEST_CASE("queued work does not grow without arrivals or scaling") {
  CloudState s = init_scenario(chain_app({300, 300}), ScenarioConfig{});
  for (int k = 0; k < 500; ++k) s.schedule_arrival(0.0);
  s.advance(0.5);  // admit the burst
  std::size_t last = s.queued_tasks();
  for (int i = 1; i <= 60; ++i) {
    s.advance(i * 5.0);
    const std::size_t now = s.queued_tasks();
    CHECK(now <= last + 1);  // a finished task can hand one successor to the next stage
    last = now;
  }
  s.drain();
  CHECK(s.queued_tasks() == 0);
  CHECK(s.counters().completed == 500);
}

TEST_CASE("idle floor cost over a day") {
  // three services keep all three initial VMs occupied
  CloudState s = init_scenario(chain_app({100, 100, 100}), ScenarioConfig{});
  for (int step = 0; step < 480; ++step) env_step(s, step, ScalingAction{0, 0}, {});
  CHECK(s.total_cost() == doctest::Approx(55.296).epsilon(1e-9));
  CHECK(s.vms().size() == 3);
}

TEST_CASE("cumulative cost is non-decreasing across release") {
  CloudState s = bare_state(chain_app({100}));
  const VmId keep = s.rent_vm(vm_type("m5.xlarge"), 0);
  s.create_container(0, 1, keep, true);
  const VmId spare = s.rent_vm(vm_type("m5.xlarge"), 0);
  double last = 0.0;
  for (int step = 0; step < 5; ++step) {
    StepMetrics m = env_step(s, step, ScalingAction{0, 0}, {});
    CHECK(m.cumulative_cost >= last);
    last = m.cumulative_cost;
  }
  CHECK(s.vms().count(spare) == 0);
  CHECK(s.vms().count(keep) == 1);
  REQUIRE(s.released_vms().size() == 1);
  CHECK(*s.released_vms()[0].released_at == 180.0);
}
