#include "gscale/hgraph.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gscale/error.hpp"

namespace gscale {

namespace {

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

Adjacency undirected_adjacency(int n, const std::vector<std::pair<int, int>>& edges) {
  Adjacency adj(n);
  for (int i = 0; i < n; ++i) adj[i].push_back(i);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return adj;
}

}  // namespace

std::array<double, kPmFeatures> pm_raw_features(const CloudState& state, PmId pm) {
  const Pm& host = state.pms().at(pm);
  double busy_vcpu = 0.0;
  for (const auto& [id, vm] : state.vms()) {
    if (vm.pm == pm) busy_vcpu += vm.last_utilization * vm.vcpu;
  }
  return {busy_vcpu / host.cpu, static_cast<double>(host.cpu)};
}

std::array<double, kVmFeatures> vm_raw_features(const CloudState& state, VmId id) {
  const Vm& vm = state.vm(id);
  return {vm.last_utilization, static_cast<double>(vm.vcpu), vm.usd_per_hour, vm.cost_at(state.clock()),
          vm.last_art_ms};
}

std::array<double, kContainerFeatures> container_raw_features(const CloudState& state, ContainerId id, int degree) {
  const Container& con = state.container(id);
  return {static_cast<double>(con.vcpu),
          static_cast<double>(state.vm_remaining(con.vm)),
          static_cast<double>(degree),
          static_cast<double>(con.pending()),
          con.last_art_ms,
          state.predicted_for(id)};
}

std::vector<std::pair<int, int>> lift_interaction_edges(const std::vector<std::pair<int, int>>& edges,
                                                        const std::vector<int>& host_of) {
  std::vector<std::pair<int, int>> lifted;
  for (auto [a, b] : edges) {
    int u = host_of.at(a);
    int v = host_of.at(b);
    if (u == v) continue;
    lifted.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(lifted.begin(), lifted.end());
  lifted.erase(std::unique(lifted.begin(), lifted.end()), lifted.end());
  return lifted;
}

HierGraph build_graph(const CloudState& state, const GraphOptions& options) {
  HierGraph g;
  std::map<PmId, int> pm_index;
  std::map<VmId, int> vm_index;
  for (const auto& [id, pm] : state.pms()) {
    pm_index[id] = g.pm_count();
    g.pm_ids.push_back(id);
  }
  for (const auto& [id, vm] : state.vms()) {
    auto host = pm_index.find(vm.pm);
    if (host == pm_index.end()) throw SimulationError("VM " + std::to_string(id) + " references a missing PM");
    vm_index[id] = g.vm_count();
    g.vm_ids.push_back(id);
    g.vm_host.push_back(host->second);
    g.vm_deployments.emplace_back(host->second, g.vm_count() - 1);
  }
  g.container_ids = state.container_list();
  const int C = g.container_count();
  for (int c = 0; c < C; ++c) {
    const Container& con = state.container(g.container_ids[c]);
    auto host = vm_index.find(con.vm);
    if (host == vm_index.end()) {
      throw SimulationError("container " + std::to_string(con.id) + " references a missing VM");
    }
    g.container_host.push_back(host->second);
    g.container_deployments.emplace_back(host->second, c);
  }

  const AppSpec& app = state.app();
  std::vector<int> ms_of(C);
  for (int c = 0; c < C; ++c) ms_of[c] = state.container(g.container_ids[c]).ms;
  for (int a = 0; a < C; ++a) {
    for (int b = 0; b < C; ++b) {
      if (app.has_edge(ms_of[a], ms_of[b])) g.container_edges.emplace_back(a, b);
    }
  }
  g.vm_edges = lift_interaction_edges(g.container_edges, g.container_host);
  std::vector<int> pm_of_container(C);
  for (int c = 0; c < C; ++c) pm_of_container[c] = g.vm_host[g.container_host[c]];
  g.pm_edges = lift_interaction_edges(g.container_edges, pm_of_container);

  g.pm_adjacency = undirected_adjacency(g.pm_count(), g.pm_edges);
  g.vm_adjacency = undirected_adjacency(g.vm_count(), g.vm_edges);
  g.container_adjacency.assign(C, {});
  std::vector<int> degree(C, 0);
  for (int c = 0; c < C; ++c) g.container_adjacency[c].push_back(c);
  for (auto [a, b] : g.container_edges) {
    g.container_adjacency[b].push_back(a);
    ++degree[a];
    ++degree[b];
  }
  for (auto& row : g.container_adjacency) std::sort(row.begin(), row.end());

  double max_pm_cpu = 1.0;
  for (const auto& [id, pm] : state.pms()) max_pm_cpu = std::max(max_pm_cpu, static_cast<double>(pm.cpu));
  double max_price = 0.0;
  for (const auto& t : state.config().vm_catalog) max_price = std::max(max_price, t.usd_per_hour);
  const NormStats& norm = state.norm();
  const double max_degree = std::max(1, C > 0 ? *std::max_element(degree.begin(), degree.end()) : 0);

  g.pm_features.resize(g.pm_count(), kPmFeatures);
  for (int p = 0; p < g.pm_count(); ++p) {
    auto raw = pm_raw_features(state, g.pm_ids[p]);
    g.pm_features(p, 0) = clip01(raw[0]);
    g.pm_features(p, 1) = clip01(raw[1] / max_pm_cpu);
  }
  g.vm_features.resize(g.vm_count(), kVmFeatures);
  for (int v = 0; v < g.vm_count(); ++v) {
    auto raw = vm_raw_features(state, g.vm_ids[v]);
    g.vm_features(v, 0) = clip01(raw[0]);
    g.vm_features(v, 1) = clip01(raw[1] / max_pm_cpu);
    g.vm_features(v, 2) = clip01(raw[2] / max_price);
    g.vm_features(v, 3) = clip01(raw[3] / options.budget_usd);
    g.vm_features(v, 4) = clip01(raw[4] / norm.art_max_ms);
  }
  g.container_features.resize(C, kContainerFeatures);
  for (int c = 0; c < C; ++c) {
    auto raw = container_raw_features(state, g.container_ids[c], degree[c]);
    g.container_features(c, 0) = clip01(raw[0] / max_pm_cpu);
    g.container_features(c, 1) = options.ablate_zeta ? 0.0 : clip01(raw[1] / max_pm_cpu);
    g.container_features(c, 2) = clip01(raw[2] / max_degree);
    g.container_features(c, 3) = clip01(raw[3] / norm.pending_max);
    g.container_features(c, 4) = clip01(raw[4] / norm.art_max_ms);
    g.container_features(c, 5) = clip01(raw[5] / norm.predicted_max);
  }
  return g;
}

void write_edge_list(std::ostream& out, const HierGraph& g) {
  out << "# hgraph pm=" << g.pm_count() << " vm=" << g.vm_count() << " container=" << g.container_count() << '\n';
  auto row = [&out](const Eigen::MatrixXd& m, int r) {
    for (int c = 0; c < m.cols(); ++c) out << ' ' << m(r, c);
  };
  for (int p = 0; p < g.pm_count(); ++p) {
    out << "pm " << p << " id=" << g.pm_ids[p];
    row(g.pm_features, p);
    out << '\n';
  }
  for (int v = 0; v < g.vm_count(); ++v) {
    out << "vm " << v << " id=" << g.vm_ids[v];
    row(g.vm_features, v);
    out << '\n';
  }
  for (int c = 0; c < g.container_count(); ++c) {
    out << "con " << c << " id=" << g.container_ids[c];
    row(g.container_features, c);
    out << '\n';
  }
  for (auto [a, b] : g.pm_edges) out << "E_pm " << a << ' ' << b << '\n';
  for (auto [a, b] : g.vm_edges) out << "E_vm " << a << ' ' << b << '\n';
  for (auto [a, b] : g.container_edges) out << "E_con " << a << ' ' << b << '\n';
  for (auto [a, b] : g.vm_deployments) out << "E_depvm " << a << ' ' << b << '\n';
  for (auto [a, b] : g.container_deployments) out << "E_depcon " << a << ' ' << b << '\n';
}

}  // namespace gscale
