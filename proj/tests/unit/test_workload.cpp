#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "gscale/error.hpp"
#include "gscale/workload.hpp"

using namespace gscale;

TEST_CASE("parse_trace") {
  CHECK(parse_trace("5\n7\n0\n").counts == std::vector<std::int64_t>{5, 7, 0});
  CHECK(parse_trace("count\n3\n").counts == std::vector<std::int64_t>{3});
  CHECK_THROWS_AS(parse_trace(""), ParseError);
  CHECK_THROWS_AS(parse_trace("header\n"), ParseError);
  CHECK_THROWS_AS(parse_trace("-1\n"), ParseError);
  try {
    parse_trace("1\n2\nx7\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("load_trace shipped two-day trace") {
  const Trace t = load_trace(std::filesystem::path(GSCALE_DATA_DIR) / "traces" / "nasa-synth.txt");
  CHECK(t.size() == 960);
  auto [train, test] = split_train_test(t);
  CHECK(train.size() == 480);
  CHECK(test.size() == 480);
  CHECK_THROWS(load_trace("/nonexistent/trace.txt"));
}

TEST_CASE("split_train_test") {
  Trace t{"t", std::vector<std::int64_t>(10)};
  std::iota(t.counts.begin(), t.counts.end(), 0);
  auto [a, b] = split_train_test(t);
  CHECK(a.size() == 5);
  CHECK(b.size() == 5);
  std::vector<std::int64_t> joined = a.counts;
  joined.insert(joined.end(), b.counts.begin(), b.counts.end());
  CHECK(joined == t.counts);

  Trace two{"t", {4, 9}};
  auto [c, d] = split_train_test(two);
  CHECK(c.counts == std::vector<std::int64_t>{4});
  CHECK(d.counts == std::vector<std::int64_t>{9});
  CHECK_THROWS(split_train_test(Trace{"t", {1}}));
}

TEST_CASE("arrivals_in_step") {
  Trace t{"t", {3, 0, 4, 7}};
  CHECK(arrivals_in_step(t, 0) == std::vector<double>{0, 60, 120});
  CHECK(arrivals_in_step(t, 1).empty());
  ArrivalOptions jit;
  jit.jitter_seed = 42;
  const auto a = arrivals_in_step(t, 2, jit);
  const auto b = arrivals_in_step(t, 2, jit);
  CHECK(a == b);
  REQUIRE(a.size() == 4);
  CHECK(std::is_sorted(a.begin(), a.end()));
  for (double x : a) {
    CHECK(x >= 360.0);
    CHECK(x < 540.0);
  }
  jit.jitter_seed = 43;
  CHECK(arrivals_in_step(t, 2, jit) != a);
  CHECK_THROWS(arrivals_in_step(t, 4));

  std::size_t total = 0;
  for (std::size_t s = 0; s < t.size(); ++s) total += arrivals_in_step(t, s).size();
  CHECK(static_cast<std::int64_t>(total) == t.total());
}

TEST_CASE("sma_predict") {
  WorkloadHistory h(3);
  CHECK_THROWS(sma_predict(h));
  for (double x : {10.0, 20.0, 30.0}) h.push(x);
  CHECK(sma_predict(h) == 20.0);
  WorkloadHistory one(5);
  one.push(7);
  CHECK(sma_predict(one) == 7.0);
  CHECK_THROWS(WorkloadHistory(0));

  std::mt19937_64 gen(5);
  std::vector<double> series(100);
  for (auto& x : series) x = static_cast<double>(gen() % 1000);
  WorkloadHistory w(5);
  for (std::size_t i = 0; i < series.size(); ++i) {
    w.push(series[i]);
    const std::size_t lo = i >= 4 ? i - 4 : 0;
    double sum = 0.0;
    for (std::size_t k = lo; k <= i; ++k) sum += series[k];
    CHECK(sma_predict(w) == sum / static_cast<double>(i - lo + 1));
    CHECK(w.size() <= 5);
    const auto [mn, mx] = std::minmax_element(w.values().begin(), w.values().end());
    CHECK(sma_predict(w) >= *mn);
    CHECK(sma_predict(w) <= *mx);
  }
}
