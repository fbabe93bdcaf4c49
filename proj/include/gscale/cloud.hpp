#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace gscale {

inline constexpr double kSecondsPerHour = 3600.0;

struct Microservice {
  int id = 0;
  double et_ms = 0.0;  // execution time with one vCPU
};

// Microservice DAG. Dummy start/end anchors are implicit: every source hangs
// off the start anchor and every sink feeds the end anchor.
class AppSpec {
 public:
  AppSpec() = default;
  // Validates and indexes the graph. Microservice ids must be 0..n-1.
  AppSpec(std::string name, std::vector<Microservice> services,
          std::vector<std::pair<int, int>> edges);

  const std::string& name() const { return name_; }
  int size() const { return static_cast<int>(services_.size()); }
  const std::vector<Microservice>& services() const { return services_; }
  double et_ms(int ms) const { return services_.at(ms).et_ms; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  bool has_edge(int from, int to) const;

  const std::vector<int>& predecessors(int ms) const { return preds_.at(ms); }
  const std::vector<int>& successors(int ms) const { return succs_.at(ms); }
  const std::vector<int>& sources() const { return sources_; }
  const std::vector<int>& sinks() const { return sinks_; }
  const std::vector<int>& topological_order() const { return topo_; }

  // Longest et-weighted path through the DAG at 1 vCPU.
  double critical_path_ms() const;

  nlohmann::json to_json() const;
  static AppSpec from_json(const nlohmann::json& doc);

 private:
  std::string name_;
  std::vector<Microservice> services_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> preds_;
  std::vector<std::vector<int>> succs_;
  std::vector<int> sources_;
  std::vector<int> sinks_;
  std::vector<int> topo_;
  std::vector<char> adjacency_;
};

AppSpec load_app_spec(const std::filesystem::path& path);

struct VmType {
  std::string name;
  int vcpu = 0;
  double mem_gib = 0.0;
  double usd_per_hour = 0.0;
};

// EC2 m5 family used by the experiments.
std::vector<VmType> default_vm_catalog();
const VmType& find_vm_type(const std::vector<VmType>& catalog, const std::string& name);
std::vector<VmType> vm_catalog_from_json(const nlohmann::json& doc);
nlohmann::json vm_catalog_to_json(const std::vector<VmType>& catalog);

struct BudgetPolicy {
  double budget_usd = 200.0;  // per evaluation horizon
  double rho = 100.0;
  int horizon_steps = 480;

  void validate() const;
};

// Closed-form model. Times: et in milliseconds, spans in seconds.
double execution_time(double et_ms, int concpu);
double vm_cost(double usd_per_hour, double st_first_s, double ft_last_s);

struct VmRental {
  double usd_per_hour = 0.0;
  std::optional<double> st_first_s;  // unset: never activated
  std::optional<double> ft_last_s;
};
double total_cost(std::span<const VmRental> vms);

// nullopt when there are no responses ("no requests", never a silent 0).
std::optional<double> average_response_time(std::span<const double> responses_ms);

double objective(double art_ms, double cost_usd, const BudgetPolicy& policy);
double violation_degree(double cost_usd, double budget_usd);

}  // namespace gscale
