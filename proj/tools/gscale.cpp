// gscale: train, evaluate, sweep and report for the autoscaling simulator.

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gscale/error.hpp"
#include "gscale/experiment.hpp"
#include "gscale/report.hpp"

namespace fs = std::filesystem;
using namespace gscale;

namespace {

struct Common {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string out = "out";
  bool worst_case = false;
  bool ablate_zeta = false;
  std::string ablate_layers = "none";
  std::string trace;
  std::optional<int> train_split;
  std::optional<int> sma_window;
  std::optional<std::uint64_t> jitter_seed;
  std::optional<double> budget;
  std::optional<double> rho;
};

struct TrainOpts {
  int pop = 40;
  int gens = 1000;
  double lr = 0.01;
  double sigma = 0.05;
  std::string shaping = "none";
  bool mirrored = false;
  int workers = 1;
  std::string keep = "best";
};

struct EvalOpts {
  std::string policy = "hgraphscale";
  std::string params;
};

Scenario build_scenario(const Common& c) {
  if (c.scenario.empty()) throw ConfigError("--scenario is required");
  Scenario s = load_scenario(c.scenario);
  if (!c.trace.empty()) s.trace = load_trace(c.trace);
  if (c.train_split) s.train_units = *c.train_split;
  if (c.sma_window) {
    if (*c.sma_window < 1) throw ConfigError("--sma-window must be >= 1");
    s.config.sma_window = *c.sma_window;
  }
  if (c.jitter_seed) s.jitter_seed = *c.jitter_seed;
  if (c.budget) s.budget.budget_usd = *c.budget;
  if (c.rho) s.budget.rho = *c.rho;
  if (c.worst_case) apply_worst_case(s);
  s.budget.horizon_steps = static_cast<int>(s.test_trace().size());
  s.budget.validate();
  return s;
}

ModelConfig model_config(const Common& c, int scale_bound) {
  ModelConfig m;
  m.ablation = parse_ablation(c.ablate_layers);
  m.ablate_zeta = c.ablate_zeta;
  m.scale_bound = scale_bound;
  return m;
}

void print_summary(const RunReport& r, std::ostream& out) {
  out << std::fixed << std::setprecision(3);
  out << "scenario=" << r.scenario << " policy=" << r.policy << " seed=" << r.seed << " transient=" << r.transient
      << '\n';
  out << "  ART ms      " << (r.art_ms ? format_fixed(*r.art_ms, 3) : "no-requests") << '\n';
  if (r.response) {
    out << "  p50/p90/p95/p99/max ms  " << format_fixed(r.response->p50, 1) << " / " << format_fixed(r.response->p90, 1)
        << " / " << format_fixed(r.response->p95, 1) << " / " << format_fixed(r.response->p99, 1) << " / "
        << format_fixed(r.response->max, 1) << '\n';
  }
  out << "  cost USD    " << format_fixed(r.cost, 4) << " (budget " << format_fixed(r.budget, 2) << ", violation "
      << format_fixed(r.violation, 2) << "%)\n";
  out << "  objective   " << format_fixed(r.objective, 3) << '\n';
  out << "  actions     vertical=" << r.actions.vertical << " horizontal=" << r.actions.horizontal
      << " mixed=" << r.actions.mixed << " noop=" << r.actions.noop << '\n';
}

struct Trained {
  Eigen::VectorXd theta;
  std::vector<CurvePoint> curve;
};

Trained run_training(const Scenario& s, const ModelConfig& mc, const Common& c, const TrainOpts& t) {
  ErlConfig ec;
  ec.population = t.pop;
  ec.max_gen = t.gens;
  ec.lr = t.lr;
  ec.sigma = t.sigma;
  ec.seed = c.seed;
  ec.shaping = parse_shaping(t.shaping);
  ec.mirrored = t.mirrored;
  ec.workers = t.workers;
  ec.validate();
  const Eigen::VectorXd theta0 = flatten(init_params(mc, c.seed), mc);
  std::cerr << "training " << theta0.size() << " parameters, N=" << ec.population << ", gens=" << ec.max_gen << '\n';
  auto fitness = [&s, &mc](const Eigen::VectorXd& theta, int, int) { return episode_fitness(s, theta, mc); };
  TrainResult r = train(ec, theta0, fitness, [](const CurvePoint& p) {
    std::cerr << "gen " << p.gen << " best_F=" << format_fixed(p.best_fitness, 3)
              << " mean_F=" << format_fixed(p.mean_fitness, 3) << '\n';
  });
  return {t.keep == "best" ? r.best_theta : r.theta, r.curve};
}

RunReport evaluate_policy(const Scenario& s, const Common& c, const EvalOpts& e,
                          const std::optional<Eigen::VectorXd>& trained) {
  const PolicyKind kind = parse_policy(e.policy);
  Controller controller;
  ModelConfig mc = model_config(c, s.config.scale_bound);
  switch (kind) {
    case PolicyKind::HGraphScale: {
      Eigen::VectorXd theta;
      if (trained) {
        theta = *trained;
      } else if (!e.params.empty()) {
        LoadedParams loaded = load_params(e.params);
        if (loaded.config.ablation != mc.ablation || loaded.config.ablate_zeta != mc.ablate_zeta) {
          if (c.ablate_layers != "none" || c.ablate_zeta) {
            throw ConfigError("ablation flags do not match the parameter file");
          }
        }
        mc = loaded.config;
        theta = loaded.theta;
      } else {
        std::cerr << "note: no --params given, evaluating freshly initialized parameters\n";
        theta = flatten(init_params(mc, c.seed), mc);
      }
      controller = learned_controller(std::make_shared<const ModelParams>(unflatten(theta, mc)), mc,
                                      s.budget.budget_usd);
      break;
    }
    case PolicyKind::Aws: controller = aws_controller(); break;
    case PolicyKind::ProScale: controller = proscale_controller(); break;
    case PolicyKind::Random: controller = random_controller(c.seed); break;
    case PolicyKind::NoOp: controller = noop_controller(); break;
  }
  const EpisodeResult ep = run_episode(s, s.test_trace(), controller);
  RunReport r = make_report(s, to_string(kind), c.seed, ep);
  if (kind == PolicyKind::HGraphScale) {
    r.ablation = to_string(mc.ablation);
    r.ablate_zeta = mc.ablate_zeta;
  }
  return r;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("bad value '" + item + "' in --values");
    }
  }
  if (out.empty()) throw ConfigError("--values is empty");
  return out;
}

void collect_reports(const fs::path& p, std::vector<fs::path>& found) {
  if (fs::is_regular_file(p)) {
    found.push_back(p);
    return;
  }
  if (!fs::is_directory(p)) throw ConfigError("no such report path: " + p.string());
  for (const auto& entry : fs::recursive_directory_iterator(p)) {
    if (entry.is_regular_file() && entry.path().filename() == "report.json") found.push_back(entry.path());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microservice autoscaling simulator with a learned graph-attention policy"};
  app.require_subcommand(1);
  app.fallthrough();

  Common c;
  app.add_option("--scenario", c.scenario, "Scenario JSON file");
  app.add_option("--seed", c.seed, "Seed for initialization, noise and the random policy");
  app.add_option("--out", c.out, "Output directory");
  app.add_flag("--worst-case", c.worst_case, "Use 180 s horizontal / 10 s vertical transient delays");
  app.add_flag("--ablate-zeta", c.ablate_zeta, "Zero the host-headroom container feature");
  app.add_option("--ablate-layers", c.ablate_layers, "Collapse machine layers: none, pm or pm+vm")
      ->check(CLI::IsMember({"none", "pm", "pm+vm"}));
  app.add_option("--trace", c.trace, "Override the scenario's trace file");
  app.add_option("--train-split", c.train_split, "Training units (0: train and test on the whole trace)");
  app.add_option("--sma-window", c.sma_window, "SMA window in steps");
  app.add_option("--jitter-seed", c.jitter_seed, "Jitter arrivals uniformly inside each step");
  app.add_option("--budget", c.budget, "Budget in USD over the evaluation horizon");
  app.add_option("--rho", c.rho, "Budget penalty coefficient");

  TrainOpts t;
  EvalOpts e;
  auto add_train_opts = [&t](CLI::App* sub) {
    sub->add_option("--pop", t.pop, "Population size");
    sub->add_option("--gens", t.gens, "Generations");
    sub->add_option("--lr", t.lr, "Adam learning rate");
    sub->add_option("--sigma", t.sigma, "Noise standard deviation");
    sub->add_option("--shaping", t.shaping, "Fitness shaping: none, rank or zscore")
        ->check(CLI::IsMember({"none", "rank", "zscore"}));
    sub->add_flag("--mirrored", t.mirrored, "Mirrored noise pairs");
    sub->add_option("--workers", t.workers, "Evaluation threads");
    sub->add_option("--keep", t.keep, "Parameters to keep: best individual seen, or the final centre")
        ->check(CLI::IsMember({"best", "final"}));
  };
  auto add_eval_opts = [&e](CLI::App* sub) {
    sub->add_option("--policy", e.policy, "hgraphscale, aws, proscale, random or noop")
        ->check(CLI::IsMember({"hgraphscale", "aws", "proscale", "random", "noop"}));
    sub->add_option("--params", e.params, "params.bin for hgraphscale");
  };

  auto* train_cmd = app.add_subcommand("train", "Train the policy and evaluate it on the test split");
  add_train_opts(train_cmd);
  auto* eval_cmd = app.add_subcommand("evaluate", "Run one policy on the test split");
  add_eval_opts(eval_cmd);
  std::string over = "budget";
  std::string values;
  bool sweep_train = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Repeat evaluate over budget or penalty values");
  add_eval_opts(sweep_cmd);
  add_train_opts(sweep_cmd);
  sweep_cmd->add_option("--over", over, "budget or rho")->check(CLI::IsMember({"budget", "rho"}));
  sweep_cmd->add_option("--values", values, "Comma-separated values (default 150,200,250 or 50,100,150,200)");
  sweep_cmd->add_flag("--train", sweep_train, "Retrain hgraphscale for every value");
  std::vector<std::string> inputs;
  auto* report_cmd = app.add_subcommand("report", "Tabulate report.json files");
  report_cmd->add_option("inputs", inputs, "Report files or directories searched recursively")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      Scenario s = build_scenario(c);
      const ModelConfig mc = model_config(c, s.config.scale_bound);
      Trained trained = run_training(s, mc, c, t);
      fs::create_directories(c.out);
      save_params(fs::path(c.out) / "params.bin", trained.theta, mc,
                  {{"seed", c.seed}, {"scenario", s.id}, {"generations", t.gens}, {"population", t.pop}, {"keep", t.keep}});
      EvalOpts self;
      RunReport r = evaluate_policy(s, c, self, trained.theta);
      r.curve = trained.curve;
      emit_report(r, c.out);
      print_summary(r, std::cout);
    } else if (*eval_cmd) {
      Scenario s = build_scenario(c);
      RunReport r = evaluate_policy(s, c, e, std::nullopt);
      emit_report(r, c.out);
      print_summary(r, std::cout);
    } else if (*sweep_cmd) {
      const std::vector<double> vals =
          values.empty() ? (over == "budget" ? std::vector<double>{150, 200, 250} : std::vector<double>{50, 100, 150, 200})
                         : parse_values(values);
      fs::create_directories(c.out);
      const fs::path combined = fs::path(c.out) / "metrics.csv";
      if (fs::exists(combined)) fs::remove(combined);
      for (double v : vals) {
        Common cv = c;
        (over == "budget" ? cv.budget : cv.rho) = v;
        cv.out = (fs::path(c.out) / (over + "-" + format_fixed(v, 0))).string();
        Scenario s = build_scenario(cv);
        std::optional<Eigen::VectorXd> theta;
        std::vector<CurvePoint> curve;
        if (sweep_train && e.policy == "hgraphscale") {
          Trained tr = run_training(s, model_config(cv, s.config.scale_bound), cv, t);
          theta = tr.theta;
          curve = tr.curve;
        }
        RunReport r = evaluate_policy(s, cv, e, theta);
        r.curve = curve;
        fs::remove(fs::path(cv.out) / "metrics.csv");
        emit_report(r, cv.out);
        append_metrics(r, combined);
        std::cout << over << '=' << format_fixed(v, 2) << ": ";
        print_summary(r, std::cout);
      }
    } else if (*report_cmd) {
      std::vector<fs::path> found;
      for (const auto& in : inputs) collect_reports(in, found);
      std::sort(found.begin(), found.end());
      std::cout << std::left << std::setw(14) << "scenario" << std::setw(13) << "policy" << std::setw(8) << "trans"
                << std::right << std::setw(12) << "ART_ms" << std::setw(12) << "p99_ms" << std::setw(11) << "cost"
                << std::setw(9) << "vio%" << std::setw(6) << "vert" << std::setw(6) << "horz" << std::setw(6) << "mix"
                << std::setw(6) << "noop" << '\n';
      for (const auto& path : found) {
        const RunReport r = load_report(path);
        std::cout << std::left << std::setw(14) << r.scenario << std::setw(13) << r.policy << std::setw(8)
                  << r.transient << std::right << std::setw(12) << (r.art_ms ? format_fixed(*r.art_ms, 2) : "n/a")
                  << std::setw(12) << (r.response ? format_fixed(r.response->p99, 2) : "n/a") << std::setw(11)
                  << format_fixed(r.cost, 3) << std::setw(9) << format_fixed(r.violation, 2) << std::setw(6)
                  << r.actions.vertical << std::setw(6) << r.actions.horizontal << std::setw(6) << r.actions.mixed
                  << std::setw(6) << r.actions.noop << '\n';
      }
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
