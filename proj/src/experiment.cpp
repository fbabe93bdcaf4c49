#include "gscale/experiment.hpp"

#include <fstream>

#include "gscale/error.hpp"

namespace gscale {

Trace Scenario::train_trace() const {
  if (train_units <= 0) return trace;
  return split_train_test(trace, train_units).first;
}

Trace Scenario::test_trace() const {
  if (train_units <= 0) return trace;
  return split_train_test(trace, train_units).second;
}

namespace {

TransientConfig transient_from_json(const nlohmann::json& doc, std::string& label) {
  if (doc.is_string()) {
    label = doc.get<std::string>();
    if (label == "normal") return TransientConfig::normal_case();
    if (label == "worst") return TransientConfig::worst_case();
    throw ConfigError("unknown transient preset '" + label + "'");
  }
  label = "custom";
  TransientConfig t;
  t.horizontal_delay_s = doc.value("horizontal_s", t.horizontal_delay_s);
  t.vertical_delay_s = doc.value("vertical_s", t.vertical_delay_s);
  return t;
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  Scenario s;
  try {
    s.id = doc.value("id", std::string("scenario"));
    s.app = std::make_shared<const AppSpec>(load_app_spec(base_dir / doc.at("app").get<std::string>()));
    s.trace = load_trace(base_dir / doc.at("trace").get<std::string>());
    s.train_units = doc.value("train_units", 0);

    ScenarioConfig& c = s.config;
    if (doc.contains("vm_catalog")) c.vm_catalog = vm_catalog_from_json(doc.at("vm_catalog"));
    c.pm_cpu = doc.value("pm_cpu", c.pm_cpu);
    c.pm_mem_gib = doc.value("pm_mem_gib", c.pm_mem_gib);
    c.pm_count = doc.value("pm_count", c.pm_count);
    c.initial_vm_type = doc.value("initial_vm_type", c.initial_vm_type);
    c.initial_vm_count = doc.value("initial_vm_count", c.initial_vm_count);
    c.decision_interval_s = doc.value("decision_interval_s", c.decision_interval_s);
    c.sma_window = doc.value("sma_window", c.sma_window);
    c.scale_bound = doc.value("scale_bound", c.scale_bound);
    if (doc.contains("transient")) c.transient = transient_from_json(doc.at("transient"), s.transient_label);

    s.budget.budget_usd = doc.value("budget_usd", s.budget.budget_usd);
    s.budget.rho = doc.value("rho", s.budget.rho);
    if (doc.contains("jitter_seed") && !doc.at("jitter_seed").is_null()) {
      s.jitter_seed = doc.at("jitter_seed").get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError("scenario " + s.id + ": " + ex.what());
  }
  s.budget.horizon_steps = static_cast<int>(s.test_trace().size());
  s.budget.validate();
  s.config.transient.validate();
  if (s.config.sma_window < 1) throw ConfigError("sma_window must be >= 1");
  find_vm_type(s.config.vm_catalog, s.config.initial_vm_type);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(path.string() + ": " + ex.what());
  }
  return scenario_from_json(doc, path.parent_path());
}

void apply_worst_case(Scenario& scenario) {
  scenario.config.transient = TransientConfig::worst_case();
  scenario.transient_label = "worst";
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::HGraphScale: return "hgraphscale";
    case PolicyKind::Aws: return "aws";
    case PolicyKind::ProScale: return "proscale";
    case PolicyKind::Random: return "random";
    case PolicyKind::NoOp: return "noop";
  }
  return "noop";
}

PolicyKind parse_policy(const std::string& text) {
  for (auto k : {PolicyKind::HGraphScale, PolicyKind::Aws, PolicyKind::ProScale, PolicyKind::Random,
                 PolicyKind::NoOp}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown policy '" + text + "'");
}

Controller noop_controller() {
  return [](CloudState&, int) { return StepOutcome{}; };
}

Controller aws_controller(ThresholdConfig cfg) {
  cfg.validate();
  return [cfg](CloudState& state, int) { return StepOutcome{aws_scale_step(state, cfg), std::nullopt}; };
}

Controller proscale_controller() {
  return [](CloudState& state, int) { return StepOutcome{proscale_step(state, sma_predictions(state)), std::nullopt}; };
}

Controller random_controller(std::uint64_t seed) {
  auto policy = std::make_shared<RandomPolicy>(seed);
  return [policy](CloudState& state, int) {
    StepOutcome out;
    out.action = random_policy_step(state, *policy);
    out.ops.push_back(execute_action(state, *out.action));
    return out;
  };
}

Controller learned_controller(std::shared_ptr<const ModelParams> params, ModelConfig config, double budget_usd) {
  if (!params) throw ConfigError("learned controller needs parameters");
  return [params, config, budget_usd](CloudState& state, int) {
    StepOutcome out;
    out.action = decide(state, *params, config, budget_usd);
    out.ops.push_back(execute_action(state, *out.action));
    return out;
  };
}

EpisodeResult run_episode(const Scenario& scenario, const Trace& trace, const Controller& controller,
                          const EpisodeOptions& options) {
  CloudState state = init_scenario(scenario.app, scenario.config);
  ArrivalOptions arrivals;
  arrivals.interval_s = scenario.config.decision_interval_s;
  arrivals.jitter_seed = options.jitter_seed ? options.jitter_seed : scenario.jitter_seed;

  EpisodeResult result;
  const int horizon = static_cast<int>(trace.size());
  result.steps.reserve(static_cast<std::size_t>(horizon));
  for (int step = 0; step < horizon; ++step) {
    release_idle_vms(state);
    StepOutcome outcome = controller(state, step);
    const auto times = arrivals_in_step(trace, static_cast<std::size_t>(step), arrivals);
    StepMetrics m = run_step(state, step, times, outcome.ops);
    if (outcome.action) {
      m.action_ind = outcome.action->ind;
      m.action_scale = outcome.action->scale;
    }
    result.steps.push_back(m);
    std::vector<int> counts(static_cast<std::size_t>(state.app().size()));
    for (int ms = 0; ms < state.app().size(); ++ms) {
      counts[ms] = static_cast<int>(state.live_containers_of(ms).size());
    }
    result.replicas.push_back(std::move(counts));
    if (options.check_invariants) state.check_invariants();
  }
  result.cost = state.total_cost();
  state.drain();
  if (options.check_invariants) state.check_invariants();
  result.responses_ms = state.responses_ms();
  result.counters = state.counters();
  result.art_ms = average_response_time(result.responses_ms);
  result.objective = objective(result.art_ms.value_or(0.0), result.cost, scenario.budget);
  return result;
}

Evaluation episode_fitness(const Scenario& scenario, const Eigen::VectorXd& theta, const ModelConfig& config) {
  auto params = std::make_shared<const ModelParams>(unflatten(theta, config));
  const EpisodeResult r = run_episode(scenario, scenario.train_trace(),
                                      learned_controller(params, config, scenario.budget.budget_usd));
  return {r.objective, r.art_ms.value_or(0.0), r.cost};
}

}  // namespace gscale
