#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>

#include "gscale/error.hpp"
#include "gscale/report.hpp"

namespace py = pybind11;
using namespace gscale;

namespace {

ModelConfig model_config(const std::string& ablation, bool ablate_zeta, int scale_bound) {
  ModelConfig mc;
  mc.ablation = parse_ablation(ablation);
  mc.ablate_zeta = ablate_zeta;
  mc.scale_bound = scale_bound;
  return mc;
}

Scenario scenario_at(const std::string& path, bool worst_case) {
  Scenario s = load_scenario(path);
  if (worst_case) apply_worst_case(s);
  return s;
}

py::dict curve_point(const CurvePoint& p) {
  py::dict d;
  d["gen"] = p.gen;
  d["best_fitness"] = p.best_fitness;
  d["mean_fitness"] = p.mean_fitness;
  d["best_art_ms"] = p.best_art_ms;
  d["best_cost"] = p.best_cost;
  return d;
}

// Report as a JSON string; the Python wrapper decodes it.
std::string evaluate(const std::string& scenario, const std::string& policy, std::uint64_t seed, bool worst_case,
                     std::optional<Eigen::VectorXd> theta, const std::string& ablation, bool ablate_zeta) {
  const Scenario s = scenario_at(scenario, worst_case);
  const PolicyKind kind = parse_policy(policy);
  ModelConfig mc = model_config(ablation, ablate_zeta, s.config.scale_bound);
  Controller controller;
  switch (kind) {
    case PolicyKind::HGraphScale: {
      const Eigen::VectorXd t = theta ? *theta : flatten(init_params(mc, seed), mc);
      controller = learned_controller(std::make_shared<const ModelParams>(unflatten(t, mc)), mc, s.budget.budget_usd);
      break;
    }
    case PolicyKind::Aws: controller = aws_controller(); break;
    case PolicyKind::ProScale: controller = proscale_controller(); break;
    case PolicyKind::Random: controller = random_controller(seed); break;
    case PolicyKind::NoOp: controller = noop_controller(); break;
  }
  RunReport r;
  {
    py::gil_scoped_release release;
    r = make_report(s, to_string(kind), seed, run_episode(s, s.test_trace(), controller));
  }
  if (kind == PolicyKind::HGraphScale) {
    r.ablation = to_string(mc.ablation);
    r.ablate_zeta = mc.ablate_zeta;
  }
  return to_json(r).dump();
}

py::tuple train_policy(const std::string& scenario, int population, int generations, double lr, double sigma,
                       std::uint64_t seed, const std::string& shaping, bool mirrored, const std::string& ablation,
                       bool ablate_zeta, bool keep_best, int workers) {
  const Scenario s = scenario_at(scenario, false);
  const ModelConfig mc = model_config(ablation, ablate_zeta, s.config.scale_bound);
  ErlConfig ec;
  ec.population = population;
  ec.max_gen = generations;
  ec.lr = lr;
  ec.sigma = sigma;
  ec.seed = seed;
  ec.shaping = parse_shaping(shaping);
  ec.mirrored = mirrored;
  ec.workers = workers;
  TrainResult r;
  {
    py::gil_scoped_release release;
    r = train(ec, flatten(init_params(mc, seed), mc),
              [&](const Eigen::VectorXd& t, int, int) { return episode_fitness(s, t, mc); });
  }
  py::list curve;
  for (const auto& p : r.curve) curve.append(curve_point(p));
  return py::make_tuple(keep_best ? r.best_theta : r.theta, curve);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Container-cloud autoscaling simulator, graph-attention policy and ES trainer";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  m.def("execution_time", &execution_time, py::arg("et_ms"), py::arg("vcpu"));
  m.def("vm_cost", &vm_cost, py::arg("usd_per_hour"), py::arg("start_s"), py::arg("end_s"));
  m.def(
      "objective",
      [](double art_ms, double cost, double budget, double rho) {
        return objective(art_ms, cost, BudgetPolicy{budget, rho});
      },
      py::arg("art_ms"), py::arg("cost"), py::arg("budget") = 200.0, py::arg("rho") = 100.0);
  m.def("violation_degree", &violation_degree, py::arg("cost"), py::arg("budget"));

  m.def(
      "plan_action",
      [](int scale, int max_vcpu, int con_vcpu) {
        const ActionPlan p = plan_action(scale, max_vcpu, con_vcpu);
        static const char* names[] = {"noop", "vertical_up", "vertical_plus_new", "vertical_down", "delete"};
        py::dict d;
        d["branch"] = names[static_cast<int>(p.branch)];
        d["vertical_delta"] = p.vertical_delta;
        d["new_container_vcpu"] = p.new_container_vcpu;
        d["delete_target"] = p.delete_target;
        return d;
      },
      py::arg("scale"), py::arg("max_vcpu"), py::arg("con_vcpu"));

  m.def(
      "param_count",
      [](const std::string& ablation) { return param_count(model_config(ablation, false, 4)); },
      py::arg("ablation") = "none");
  m.def(
      "init_params",
      [](std::uint64_t seed, const std::string& ablation) {
        const ModelConfig mc = model_config(ablation, false, 4);
        return flatten(init_params(mc, seed), mc);
      },
      py::arg("seed") = 0, py::arg("ablation") = "none");

  m.def("evaluate_json", &evaluate, py::arg("scenario"), py::arg("policy") = "hgraphscale", py::arg("seed") = 0,
        py::arg("worst_case") = false, py::arg("theta") = py::none(), py::arg("ablation") = "none",
        py::arg("ablate_zeta") = false);
  m.def("train", &train_policy, py::arg("scenario"), py::arg("population") = 40, py::arg("generations") = 1000,
        py::arg("lr") = 0.01, py::arg("sigma") = 0.05, py::arg("seed") = 0, py::arg("shaping") = "none",
        py::arg("mirrored") = false, py::arg("ablation") = "none", py::arg("ablate_zeta") = false,
        py::arg("keep_best") = true, py::arg("workers") = 1,
        "Returns (theta, curve). keep_best selects the best individual seen instead of the final centre.");

  m.def(
      "save_params",
      [](const std::string& path, const Eigen::VectorXd& theta, const std::string& ablation, bool ablate_zeta) {
        save_params(path, theta, model_config(ablation, ablate_zeta, 4));
      },
      py::arg("path"), py::arg("theta"), py::arg("ablation") = "none", py::arg("ablate_zeta") = false);
  m.def(
      "load_params",
      [](const std::string& path) {
        LoadedParams p = load_params(path);
        return py::make_tuple(p.theta, to_string(p.config.ablation), p.config.ablate_zeta);
      },
      py::arg("path"), "Returns (theta, ablation, ablate_zeta).");
}
