#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gscale/baselines.hpp"
#include "gscale/erl.hpp"
#include "gscale/model.hpp"

namespace gscale {

struct Scenario {
  std::string id;
  std::shared_ptr<const AppSpec> app;
  ScenarioConfig config;
  BudgetPolicy budget;
  Trace trace;
  int train_units = 0;  // 0: train and test on the whole trace
  std::optional<std::uint64_t> jitter_seed;
  std::string transient_label = "normal";

  Trace train_trace() const;
  Trace test_trace() const;
};

// Paths inside the scenario file are resolved relative to it.
Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

// Swaps in the long-delay transient preset.
void apply_worst_case(Scenario& scenario);

enum class PolicyKind { HGraphScale, Aws, ProScale, Random, NoOp };
std::string to_string(PolicyKind kind);
PolicyKind parse_policy(const std::string& text);

struct StepOutcome {
  std::vector<ExecutedOps> ops;
  std::optional<ScalingAction> action;
};

// Called once per step after idle VMs are released and before arrivals.
using Controller = std::function<StepOutcome(CloudState& state, int step)>;

Controller noop_controller();
Controller aws_controller(ThresholdConfig cfg = {});
Controller proscale_controller();
Controller random_controller(std::uint64_t seed);
Controller learned_controller(std::shared_ptr<const ModelParams> params, ModelConfig config, double budget_usd);

struct EpisodeOptions {
  bool check_invariants = false;
  std::optional<std::uint64_t> jitter_seed;
};

struct EpisodeResult {
  std::vector<StepMetrics> steps;
  std::vector<std::vector<int>> replicas;  // [step][microservice] live replicas at step end
  std::vector<double> responses_ms;
  Counters counters;
  std::optional<double> art_ms;
  double cost = 0.0;  // at the end of the horizon
  double objective = 0.0;
};

// Replays `trace` one step per decision interval, then lets in-flight
// requests finish (no arrivals, no further rental) so every admitted request
// has a response time.
EpisodeResult run_episode(const Scenario& scenario, const Trace& trace, const Controller& controller,
                          const EpisodeOptions& options = {});

// Fitness for the ERL trainer: one episode on the training split.
Evaluation episode_fitness(const Scenario& scenario, const Eigen::VectorXd& theta, const ModelConfig& config);

}  // namespace gscale
