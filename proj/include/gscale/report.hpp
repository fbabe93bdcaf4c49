#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gscale/experiment.hpp"

namespace gscale {

struct Percentiles {
  double p50 = 0.0;
  double p90 = 0.0;
  double p95 = 0.0;
  double p99 = 0.0;
  double max = 0.0;

  bool operator==(const Percentiles&) const = default;
};

// Nearest-rank percentile (1 <= rank = ceil(q/100 * n)). Throws on empty input.
double nearest_rank(std::span<const double> sorted, double q);
// nullopt when there are no responses.
std::optional<Percentiles> percentiles(std::span<const double> responses_ms);

struct ActionBreakdown {
  int vertical = 0;
  int horizontal = 0;  // includes delete-only steps
  int mixed = 0;
  int noop = 0;

  int total() const { return vertical + horizontal + mixed + noop; }
  bool operator==(const ActionBreakdown&) const = default;
};

ActionBreakdown breakdown(std::span<const StepMetrics> steps);

struct StepRecord {
  int step = 0;
  int ind = -1;
  int scale = 0;
  std::string kind;
  std::int64_t admitted = 0;
  std::int64_t completed = 0;
  double step_art_ms = 0.0;
  double cumulative_cost = 0.0;
  int live_containers = 0;
  int live_vms = 0;

  bool operator==(const StepRecord&) const = default;
};

struct RunReport {
  std::string scenario;
  std::string policy;
  std::uint64_t seed = 0;
  std::string transient = "normal";
  std::string ablation = "none";
  bool ablate_zeta = false;
  int steps = 0;
  std::int64_t admitted = 0;
  std::int64_t completed = 0;
  std::int64_t rejected = 0;
  std::optional<double> art_ms;  // nullopt: no requests
  std::optional<Percentiles> response;
  double cost = 0.0;
  double budget = 0.0;
  double rho = 0.0;
  double violation = 0.0;  // percent
  double objective = 0.0;
  ActionBreakdown actions;
  std::vector<std::vector<int>> replicas;
  std::vector<StepRecord> trace;
  std::vector<CurvePoint> curve;

  bool operator==(const RunReport&) const = default;
};

RunReport make_report(const Scenario& scenario, const std::string& policy, std::uint64_t seed,
                      const EpisodeResult& episode);

nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& doc);

// Fixed-point with `digits` decimals, e.g. format_fixed(13.389, 2) == "13.39".
std::string format_fixed(double value, int digits);

const std::vector<std::string>& metrics_columns();
std::vector<std::string> metrics_row(const RunReport& report);

// report.json, actions.csv and curve.csv are overwritten; a row is appended to
// metrics.csv (header written when the file is new).
void emit_report(const RunReport& report, const std::filesystem::path& dir);
void append_metrics(const RunReport& report, const std::filesystem::path& csv);
RunReport load_report(const std::filesystem::path& dir);
void write_curve_csv(std::span<const CurvePoint> curve, const std::filesystem::path& path);

}  // namespace gscale
