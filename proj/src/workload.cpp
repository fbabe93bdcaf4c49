#include "gscale/workload.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include "gscale/error.hpp"
#include "gscale/rng.hpp"

namespace gscale {

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_count(const std::string& field, std::int64_t& out) {
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::int64_t Trace::total() const {
  std::int64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

Trace parse_trace(const std::string& text, std::string name) {
  Trace trace{std::move(name), {}};
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string field = trim(line);
    if (field.empty()) continue;
    // Single-column CSV; tolerate a trailing comma-separated remainder.
    if (auto comma = field.find(','); comma != std::string::npos) field = trim(field.substr(0, comma));
    std::int64_t value = 0;
    if (!parse_count(field, value)) {
      if (!seen_content) {
        seen_content = true;  // header
        continue;
      }
      throw ParseError(trace.name + ": line " + std::to_string(line_no) + ": not an integer: '" + field + "'");
    }
    seen_content = true;
    if (value < 0) {
      throw ParseError(trace.name + ": line " + std::to_string(line_no) + ": negative count");
    }
    trace.counts.push_back(value);
  }
  if (trace.counts.empty()) throw ParseError(trace.name + ": trace is empty");
  return trace;
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str(), path.stem().string());
}

std::pair<Trace, Trace> split_train_test(const Trace& trace, int train_units) {
  const std::size_t n = trace.size();
  if (n < 2) throw ConfigError("split_train_test: trace needs at least two time units");
  std::size_t cut = static_cast<std::size_t>(std::max(train_units, 1));
  if (cut >= n) cut = n / 2;
  Trace train{trace.name + "-train", {trace.counts.begin(), trace.counts.begin() + cut}};
  Trace test{trace.name + "-test", {trace.counts.begin() + cut, trace.counts.end()}};
  return {std::move(train), std::move(test)};
}

std::vector<double> arrivals_in_step(const Trace& trace, std::size_t step, const ArrivalOptions& opts) {
  if (step >= trace.size()) throw ConfigError("arrivals_in_step: step out of range");
  const std::int64_t count = trace.counts[step];
  const double origin = static_cast<double>(step) * opts.interval_s;
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(count));
  if (count == 0) return times;
  const double spacing = opts.interval_s / static_cast<double>(count);
  if (!opts.jitter_seed) {
    for (std::int64_t k = 0; k < count; ++k) times.push_back(origin + spacing * static_cast<double>(k));
    return times;
  }
  std::mt19937_64 gen(derive_seed(*opts.jitter_seed, step, 0x6a177e5ULL));
  for (std::int64_t k = 0; k < count; ++k) {
    double offset = uniform01(gen) * opts.interval_s;
    times.push_back(origin + offset);
  }
  std::sort(times.begin(), times.end());
  return times;
}

WorkloadHistory::WorkloadHistory(int window) : window_(window) {
  if (window_ < 1) throw ConfigError("SMA window must be >= 1");
}

void WorkloadHistory::push(double count) {
  buffer_.push_back(count);
  while (static_cast<int>(buffer_.size()) > window_) buffer_.pop_front();
}

double sma_predict(const WorkloadHistory& history) {
  if (history.empty()) throw ConfigError("sma_predict: empty history");
  double sum = 0.0;
  for (double v : history.values()) sum += v;
  return sum / static_cast<double>(history.size());
}

}  // namespace gscale
