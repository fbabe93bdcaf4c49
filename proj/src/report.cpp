#include "gscale/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "gscale/error.hpp"

namespace gscale {

double nearest_rank(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DomainError("percentile of an empty sample");
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::optional<Percentiles> percentiles(std::span<const double> responses_ms) {
  if (responses_ms.empty()) return std::nullopt;
  std::vector<double> sorted(responses_ms.begin(), responses_ms.end());
  std::sort(sorted.begin(), sorted.end());
  return Percentiles{nearest_rank(sorted, 50), nearest_rank(sorted, 90), nearest_rank(sorted, 95),
                     nearest_rank(sorted, 99), sorted.back()};
}

ActionBreakdown breakdown(std::span<const StepMetrics> steps) {
  ActionBreakdown b;
  for (const auto& m : steps) {
    switch (m.kind) {
      case OpKind::NoOp: ++b.noop; break;
      case OpKind::Vertical: ++b.vertical; break;
      case OpKind::Horizontal:
      case OpKind::Delete: ++b.horizontal; break;
      case OpKind::Mixed: ++b.mixed; break;
    }
  }
  return b;
}

RunReport make_report(const Scenario& scenario, const std::string& policy, std::uint64_t seed,
                      const EpisodeResult& episode) {
  RunReport r;
  r.scenario = scenario.id;
  r.policy = policy;
  r.seed = seed;
  r.transient = scenario.transient_label;
  r.steps = static_cast<int>(episode.steps.size());
  r.admitted = episode.counters.admitted;
  r.completed = episode.counters.completed;
  r.rejected = episode.counters.rejected;
  r.art_ms = episode.art_ms;
  r.response = percentiles(episode.responses_ms);
  r.cost = episode.cost;
  r.budget = scenario.budget.budget_usd;
  r.rho = scenario.budget.rho;
  r.violation = violation_degree(episode.cost, scenario.budget.budget_usd);
  r.objective = episode.objective;
  r.actions = breakdown(episode.steps);
  r.replicas = episode.replicas;
  for (const auto& m : episode.steps) {
    r.trace.push_back({m.step, m.action_ind, m.action_scale, to_string(m.kind), m.admitted, m.completed,
                       m.step_art_ms, m.cumulative_cost, m.live_containers, m.live_vms});
  }
  return r;
}

nlohmann::json to_json(const RunReport& r) {
  using nlohmann::json;
  json doc;
  doc["scenario"] = r.scenario;
  doc["policy"] = r.policy;
  doc["seed"] = r.seed;
  doc["transient"] = r.transient;
  doc["ablation"] = r.ablation;
  doc["ablate_zeta"] = r.ablate_zeta;
  doc["steps"] = r.steps;
  doc["requests"] = {{"admitted", r.admitted}, {"completed", r.completed}, {"rejected", r.rejected}};
  doc["art_ms"] = r.art_ms ? json(*r.art_ms) : json("no-requests");
  if (r.response) {
    doc["response_ms"] = {{"p50", r.response->p50},
                          {"p90", r.response->p90},
                          {"p95", r.response->p95},
                          {"p99", r.response->p99},
                          {"max", r.response->max}};
  } else {
    doc["response_ms"] = "no-requests";
  }
  doc["cost_usd"] = r.cost;
  doc["budget_usd"] = r.budget;
  doc["rho"] = r.rho;
  doc["violation_pct"] = r.violation;
  doc["objective"] = r.objective;
  doc["actions"] = {{"vertical", r.actions.vertical},
                    {"horizontal", r.actions.horizontal},
                    {"mixed", r.actions.mixed},
                    {"noop", r.actions.noop}};
  doc["replicas"] = r.replicas;
  json steps = json::array();
  for (const auto& s : r.trace) {
    steps.push_back({{"step", s.step},
                     {"ind", s.ind},
                     {"scale", s.scale},
                     {"kind", s.kind},
                     {"admitted", s.admitted},
                     {"completed", s.completed},
                     {"step_art_ms", s.step_art_ms},
                     {"cumulative_cost", s.cumulative_cost},
                     {"live_containers", s.live_containers},
                     {"live_vms", s.live_vms}});
  }
  doc["trace"] = steps;
  json curve = json::array();
  for (const auto& c : r.curve) {
    curve.push_back({{"gen", c.gen},
                     {"best_fitness", c.best_fitness},
                     {"mean_fitness", c.mean_fitness},
                     {"best_art_ms", c.best_art_ms},
                     {"best_cost", c.best_cost}});
  }
  doc["curve"] = curve;
  return doc;
}

RunReport report_from_json(const nlohmann::json& doc) {
  RunReport r;
  try {
    r.scenario = doc.at("scenario").get<std::string>();
    r.policy = doc.at("policy").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.transient = doc.at("transient").get<std::string>();
    r.ablation = doc.at("ablation").get<std::string>();
    r.ablate_zeta = doc.at("ablate_zeta").get<bool>();
    r.steps = doc.at("steps").get<int>();
    const auto& req = doc.at("requests");
    r.admitted = req.at("admitted").get<std::int64_t>();
    r.completed = req.at("completed").get<std::int64_t>();
    r.rejected = req.at("rejected").get<std::int64_t>();
    if (doc.at("art_ms").is_number()) r.art_ms = doc.at("art_ms").get<double>();
    if (const auto& p = doc.at("response_ms"); p.is_object()) {
      r.response = Percentiles{p.at("p50").get<double>(), p.at("p90").get<double>(), p.at("p95").get<double>(),
                               p.at("p99").get<double>(), p.at("max").get<double>()};
    }
    r.cost = doc.at("cost_usd").get<double>();
    r.budget = doc.at("budget_usd").get<double>();
    r.rho = doc.at("rho").get<double>();
    r.violation = doc.at("violation_pct").get<double>();
    r.objective = doc.at("objective").get<double>();
    const auto& a = doc.at("actions");
    r.actions = {a.at("vertical").get<int>(), a.at("horizontal").get<int>(), a.at("mixed").get<int>(),
                 a.at("noop").get<int>()};
    r.replicas = doc.at("replicas").get<std::vector<std::vector<int>>>();
    for (const auto& s : doc.at("trace")) {
      r.trace.push_back({s.at("step").get<int>(), s.at("ind").get<int>(), s.at("scale").get<int>(),
                         s.at("kind").get<std::string>(), s.at("admitted").get<std::int64_t>(),
                         s.at("completed").get<std::int64_t>(), s.at("step_art_ms").get<double>(),
                         s.at("cumulative_cost").get<double>(), s.at("live_containers").get<int>(),
                         s.at("live_vms").get<int>()});
    }
    for (const auto& c : doc.at("curve")) {
      r.curve.push_back({c.at("gen").get<int>(), c.at("best_fitness").get<double>(),
                         c.at("mean_fitness").get<double>(), c.at("best_art_ms").get<double>(),
                         c.at("best_cost").get<double>()});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("report: ") + ex.what());
  }
  return r;
}

std::string format_fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> columns = {
      "scenario", "policy",   "seed",     "transient", "ablation", "ablate_zeta", "steps",      "admitted",
      "completed", "rejected", "art_ms",  "p50_ms",    "p90_ms",   "p95_ms",      "p99_ms",     "max_ms",
      "cost_usd", "budget_usd", "rho",    "violation_pct", "objective", "vertical", "horizontal", "mixed",
      "noop"};
  return columns;
}

std::vector<std::string> metrics_row(const RunReport& r) {
  const std::string none = "no-requests";
  auto ms = [](double v) { return format_fixed(v, 3); };
  std::vector<std::string> row = {r.scenario,
                                  r.policy,
                                  std::to_string(r.seed),
                                  r.transient,
                                  r.ablation,
                                  r.ablate_zeta ? "1" : "0",
                                  std::to_string(r.steps),
                                  std::to_string(r.admitted),
                                  std::to_string(r.completed),
                                  std::to_string(r.rejected),
                                  r.art_ms ? ms(*r.art_ms) : none};
  for (double Percentiles::*field : {&Percentiles::p50, &Percentiles::p90, &Percentiles::p95, &Percentiles::p99,
                                     &Percentiles::max}) {
    row.push_back(r.response ? ms((*r.response).*field) : none);
  }
  row.push_back(format_fixed(r.cost, 4));
  row.push_back(format_fixed(r.budget, 4));
  row.push_back(format_fixed(r.rho, 2));
  row.push_back(format_fixed(r.violation, 2));
  row.push_back(format_fixed(r.objective, 3));
  row.push_back(std::to_string(r.actions.vertical));
  row.push_back(std::to_string(r.actions.horizontal));
  row.push_back(std::to_string(r.actions.mixed));
  row.push_back(std::to_string(r.actions.noop));
  return row;
}

namespace {

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

void append_metrics(const RunReport& report, const std::filesystem::path& csv) {
  const bool fresh = !std::filesystem::exists(csv) || std::filesystem::file_size(csv) == 0;
  auto out = open_out(csv, std::ios::app);
  if (fresh) out << join(metrics_columns()) << '\n';
  out << join(metrics_row(report)) << '\n';
}

void write_curve_csv(std::span<const CurvePoint> curve, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "gen,best_F,mean_F,best_ART,best_cost\n";
  for (const auto& c : curve) {
    out << c.gen << ',' << format_fixed(c.best_fitness, 6) << ',' << format_fixed(c.mean_fitness, 6) << ','
        << format_fixed(c.best_art_ms, 6) << ',' << format_fixed(c.best_cost, 6) << '\n';
  }
}

void emit_report(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  open_out(dir / "report.json") << to_json(report).dump(2) << '\n';
  append_metrics(report, dir / "metrics.csv");
  write_curve_csv(report.curve, dir / "curve.csv");
  auto actions = open_out(dir / "actions.csv");
  actions << "step,ind,scale,kind,admitted,completed,step_art_ms,cumulative_cost,live_containers,live_vms\n";
  for (const auto& s : report.trace) {
    actions << s.step << ',' << s.ind << ',' << s.scale << ',' << s.kind << ',' << s.admitted << ',' << s.completed
            << ',' << format_fixed(s.step_art_ms, 3) << ',' << format_fixed(s.cumulative_cost, 4) << ','
            << s.live_containers << ',' << s.live_vms << '\n';
  }
}

RunReport load_report(const std::filesystem::path& dir) {
  const auto path = std::filesystem::is_directory(dir) ? dir / "report.json" : dir;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(path.string() + ": " + ex.what());
  }
  return report_from_json(doc);
}

}  // namespace gscale
