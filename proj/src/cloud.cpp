#include "gscale/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

#include "gscale/error.hpp"

namespace gscale {

AppSpec::AppSpec(std::string name, std::vector<Microservice> services,
                 std::vector<std::pair<int, int>> edges)
    : name_(std::move(name)), services_(std::move(services)), edges_(std::move(edges)) {
  const int n = size();
  if (n == 0) throw ConfigError("app '" + name_ + "' has no microservices");
  for (int i = 0; i < n; ++i) {
    if (services_[i].id != i) throw ConfigError("microservice ids must be 0..n-1 in order");
    if (!(services_[i].et_ms > 0.0) || !std::isfinite(services_[i].et_ms)) {
      throw ConfigError("microservice " + std::to_string(i) + " has non-positive et");
    }
  }
  preds_.assign(n, {});
  succs_.assign(n, {});
  adjacency_.assign(static_cast<std::size_t>(n) * n, 0);
  for (auto [from, to] : edges_) {
    if (from < 0 || from >= n || to < 0 || to >= n || from == to) {
      throw ConfigError("invalid edge " + std::to_string(from) + "->" + std::to_string(to));
    }
    char& slot = adjacency_[static_cast<std::size_t>(from) * n + to];
    if (slot) throw ConfigError("duplicate edge " + std::to_string(from) + "->" + std::to_string(to));
    slot = 1;
    succs_[from].push_back(to);
    preds_[to].push_back(from);
  }
  for (auto& p : preds_) std::sort(p.begin(), p.end());
  for (auto& s : succs_) std::sort(s.begin(), s.end());

  // Kahn's algorithm; lowest id first keeps the order canonical.
  std::vector<int> indegree(n);
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int i = 0; i < n; ++i) {
    indegree[i] = static_cast<int>(preds_[i].size());
    if (indegree[i] == 0) {
      ready.push(i);
      sources_.push_back(i);
    }
    if (succs_[i].empty()) sinks_.push_back(i);
  }
  while (!ready.empty()) {
    int u = ready.top();
    ready.pop();
    topo_.push_back(u);
    for (int v : succs_[u]) {
      if (--indegree[v] == 0) ready.push(v);
    }
  }
  if (static_cast<int>(topo_.size()) != n) throw ConfigError("app '" + name_ + "' is not a DAG");
  // With implicit anchors every node is reachable from start and reaches end.
}

bool AppSpec::has_edge(int from, int to) const {
  const int n = size();
  if (from < 0 || from >= n || to < 0 || to >= n) return false;
  return adjacency_[static_cast<std::size_t>(from) * n + to] != 0;
}

double AppSpec::critical_path_ms() const {
  std::vector<double> finish(size(), 0.0);
  double longest = 0.0;
  for (int u : topo_) {
    double start = 0.0;
    for (int p : preds_[u]) start = std::max(start, finish[p]);
    finish[u] = start + services_[u].et_ms;
    longest = std::max(longest, finish[u]);
  }
  return longest;
}

nlohmann::json AppSpec::to_json() const {
  nlohmann::json doc;
  doc["name"] = name_;
  doc["microservices"] = nlohmann::json::array();
  for (const auto& ms : services_) doc["microservices"].push_back({{"id", ms.id}, {"et_ms", ms.et_ms}});
  doc["edges"] = nlohmann::json::array();
  for (auto [a, b] : edges_) doc["edges"].push_back({a, b});
  return doc;
}

AppSpec AppSpec::from_json(const nlohmann::json& doc) {
  try {
    std::vector<Microservice> services;
    for (const auto& item : doc.at("microservices")) {
      services.push_back({item.at("id").get<int>(), item.at("et_ms").get<double>()});
    }
    std::sort(services.begin(), services.end(),
              [](const Microservice& a, const Microservice& b) { return a.id < b.id; });
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : doc.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    return AppSpec(doc.value("name", std::string("app")), std::move(services), std::move(edges));
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("app document: ") + ex.what());
  }
}

AppSpec load_app_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open app file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(path.string() + ": " + ex.what());
  }
  return AppSpec::from_json(doc);
}

std::vector<VmType> default_vm_catalog() {
  return {
      {"m5.xlarge", 4, 16, 0.192},   {"m5.2xlarge", 8, 32, 0.384},
      {"m5.4xlarge", 16, 64, 0.768}, {"m5.8xlarge", 32, 128, 1.536},
      {"m5.12xlarge", 48, 192, 2.304},
  };
}

const VmType& find_vm_type(const std::vector<VmType>& catalog, const std::string& name) {
  for (const auto& t : catalog) {
    if (t.name == name) return t;
  }
  throw ConfigError("unknown VM type '" + name + "'");
}

std::vector<VmType> vm_catalog_from_json(const nlohmann::json& doc) {
  std::vector<VmType> catalog;
  try {
    for (const auto& item : doc) {
      catalog.push_back({item.at("name").get<std::string>(), item.at("vcpu").get<int>(),
                         item.at("mem_gib").get<double>(), item.at("usd_per_hour").get<double>()});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("vm catalog: ") + ex.what());
  }
  for (const auto& t : catalog) {
    if (t.vcpu < 1 || !(t.usd_per_hour > 0.0)) throw ConfigError("invalid VM type '" + t.name + "'");
  }
  if (catalog.empty()) throw ConfigError("empty VM catalog");
  return catalog;
}

nlohmann::json vm_catalog_to_json(const std::vector<VmType>& catalog) {
  auto doc = nlohmann::json::array();
  for (const auto& t : catalog) {
    doc.push_back({{"name", t.name}, {"vcpu", t.vcpu}, {"mem_gib", t.mem_gib}, {"usd_per_hour", t.usd_per_hour}});
  }
  return doc;
}

void BudgetPolicy::validate() const {
  if (!(budget_usd > 0.0)) throw ConfigError("budget must be positive");
  if (!(rho >= 0.0)) throw ConfigError("penalty coefficient must be non-negative");
  if (horizon_steps < 1) throw ConfigError("horizon must be at least one step");
}

double execution_time(double et_ms, int concpu) {
  if (!(et_ms > 0.0)) throw DomainError("execution_time: et must be positive");
  if (concpu < 1) throw DomainError("execution_time: concpu must be >= 1");
  return et_ms / concpu;
}

double vm_cost(double usd_per_hour, double st_first_s, double ft_last_s) {
  if (ft_last_s < st_first_s) throw DomainError("vm_cost: negative rental span");
  return usd_per_hour * (ft_last_s - st_first_s) / kSecondsPerHour;
}

double total_cost(std::span<const VmRental> vms) {
  double sum = 0.0;
  for (const auto& vm : vms) {
    if (!vm.st_first_s || !vm.ft_last_s) continue;
    sum += vm_cost(vm.usd_per_hour, *vm.st_first_s, *vm.ft_last_s);
  }
  return sum;
}

std::optional<double> average_response_time(std::span<const double> responses_ms) {
  if (responses_ms.empty()) return std::nullopt;
  double sum = 0.0;
  for (double r : responses_ms) sum += r;
  return sum / static_cast<double>(responses_ms.size());
}

double objective(double art_ms, double cost_usd, const BudgetPolicy& policy) {
  return -art_ms - policy.rho * std::max(0.0, cost_usd - policy.budget_usd);
}

double violation_degree(double cost_usd, double budget_usd) {
  if (!(budget_usd > 0.0)) throw DomainError("violation_degree: budget must be positive");
  return std::max(0.0, cost_usd - budget_usd) / budget_usd * 100.0;
}

}  // namespace gscale
