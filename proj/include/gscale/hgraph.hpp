#pragma once

#include <array>
#include <ostream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gscale/simulator.hpp"

namespace gscale {

// Neighbour lists per node, self-loop included, ascending order.
using Adjacency = std::vector<std::vector<int>>;

inline constexpr int kPmFeatures = 2;
inline constexpr int kVmFeatures = 5;
inline constexpr int kContainerFeatures = 6;
inline constexpr int kZetaColumn = 1;

// Three-layer snapshot graph. Node indices are positions in the id vectors;
// container rows follow CloudState::container_list(), so row i is Ind i.
struct HierGraph {
  std::vector<PmId> pm_ids;
  std::vector<VmId> vm_ids;
  std::vector<ContainerId> container_ids;
  std::vector<int> vm_host;         // VM index -> PM index
  std::vector<int> container_host;  // container index -> VM index

  std::vector<std::pair<int, int>> pm_edges;         // undirected, first < second
  std::vector<std::pair<int, int>> vm_edges;         // undirected, first < second
  std::vector<std::pair<int, int>> container_edges;  // directed
  std::vector<std::pair<int, int>> vm_deployments;         // PM -> VM
  std::vector<std::pair<int, int>> container_deployments;  // VM -> container

  Eigen::MatrixXd pm_features;         // P x 2, normalized
  Eigen::MatrixXd vm_features;         // V x 5, normalized
  Eigen::MatrixXd container_features;  // C x 6, normalized

  Adjacency pm_adjacency;
  Adjacency vm_adjacency;
  Adjacency container_adjacency;  // self + predecessors along container edges

  int pm_count() const { return static_cast<int>(pm_ids.size()); }
  int vm_count() const { return static_cast<int>(vm_ids.size()); }
  int container_count() const { return static_cast<int>(container_ids.size()); }
};

struct GraphOptions {
  double budget_usd = 200.0;  // scales the accrued-rental feature
  bool ablate_zeta = false;   // zero the host-headroom container feature
};

// Raw (unnormalized) feature vectors.
std::array<double, kPmFeatures> pm_raw_features(const CloudState& state, PmId pm);
std::array<double, kVmFeatures> vm_raw_features(const CloudState& state, VmId vm);
// `degree` is the container's total degree in the container layer.
std::array<double, kContainerFeatures> container_raw_features(const CloudState& state, ContainerId id, int degree);

// Machine-layer edges induced by container interactions that cross machines:
// hosts u != v are linked when some container edge joins a container on u
// with one on v. Returns undirected pairs (first < second), sorted, unique.
std::vector<std::pair<int, int>> lift_interaction_edges(const std::vector<std::pair<int, int>>& edges,
                                                        const std::vector<int>& host_of);

HierGraph build_graph(const CloudState& state, const GraphOptions& options = {});

// Plain-text edge list for inspection.
void write_edge_list(std::ostream& out, const HierGraph& graph);

}  // namespace gscale
