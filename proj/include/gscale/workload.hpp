#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gscale {

inline constexpr double kTimeUnitSeconds = 180.0;
inline constexpr int kDefaultTrainUnits = 480;

// Pre-aggregated request counts, one per time unit.
struct Trace {
  std::string name;
  std::vector<std::int64_t> counts;

  std::size_t size() const { return counts.size(); }
  std::int64_t total() const;
};

// One integer per line, optional non-numeric header on the first line.
Trace load_trace(const std::filesystem::path& path);
Trace parse_trace(const std::string& text, std::string name = "trace");

// First `train_units` units for training (first half when the trace is not
// longer than that), remainder for test.
std::pair<Trace, Trace> split_train_test(const Trace& trace, int train_units = kDefaultTrainUnits);

struct ArrivalOptions {
  double interval_s = kTimeUnitSeconds;
  std::optional<std::uint64_t> jitter_seed;  // unset: evenly spaced
};

// Absolute arrival timestamps (seconds) for one time unit, sorted.
std::vector<double> arrivals_in_step(const Trace& trace, std::size_t step, const ArrivalOptions& opts = {});

// Bounded buffer of recent per-step counts for one microservice.
class WorkloadHistory {
 public:
  explicit WorkloadHistory(int window = 5);

  void push(double count);
  int window() const { return window_; }
  bool empty() const { return buffer_.empty(); }
  std::size_t size() const { return buffer_.size(); }
  const std::deque<double>& values() const { return buffer_; }

 private:
  int window_;
  std::deque<double> buffer_;
};

// Simple moving average of the buffered counts.
double sma_predict(const WorkloadHistory& history);

}  // namespace gscale
