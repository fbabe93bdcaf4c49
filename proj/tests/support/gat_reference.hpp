#pragma once

// Shared by the unit and acceptance suites: random graph builders, node
// relabeling and a loop-only GAT reference.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "gscale/chgnn.hpp"

namespace gatref {

using namespace gscale;

inline Eigen::MatrixXd random_matrix(std::mt19937_64& gen, int r, int c, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = u(gen);
  return m;
}

inline Adjacency random_adjacency(std::mt19937_64& gen, int n) {
  Adjacency adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || gen() % 3 == 0) adj[i].push_back(j);
    }
  }
  return adj;
}

// Plain loops over std::vector, no shared code with the library.
inline std::vector<std::vector<double>> gat_oracle(const GatLayerParams& p, const Eigen::MatrixXd& h, const Adjacency& adj) {
  const int n = static_cast<int>(h.rows()), f = static_cast<int>(h.cols()), fo = static_cast<int>(p.weight.rows());
  std::vector<std::vector<double>> wh(n, std::vector<double>(fo, 0.0));
  for (int i = 0; i < n; ++i)
    for (int o = 0; o < fo; ++o)
      for (int k = 0; k < f; ++k) wh[i][o] += p.weight(o, k) * h(i, k);
  std::vector<std::vector<double>> out(n, std::vector<double>(fo, 0.0));
  for (int i = 0; i < n; ++i) {
    std::vector<double> e;
    for (int j : adj[i]) {
      double s = 0.0;
      for (int o = 0; o < fo; ++o) s += p.attention(o) * wh[i][o] + p.attention(fo + o) * wh[j][o];
      e.push_back(s > 0 ? s : 0.2 * s);
    }
    double z = 0.0;
    for (double x : e) z += std::exp(x);
    for (int o = 0; o < fo; ++o) {
      double acc = 0.0;
      for (std::size_t k = 0; k < adj[i].size(); ++k) acc += std::exp(e[k]) / z * wh[adj[i][k]][o];
      out[i][o] = 1.0 / (1.0 + std::exp(-acc));
    }
  }
  return out;
}

inline GatLayerParams random_layer(std::mt19937_64& gen, int fin, int fout) {
  GatLayerParams p;
  p.weight = random_matrix(gen, fout, fin);
  p.attention = random_matrix(gen, 2 * fout, 1);
  return p;
}

inline HierGraph random_graph(std::mt19937_64& gen) {
  HierGraph g;
  const int P = 1 + static_cast<int>(gen() % 3), V = 1 + static_cast<int>(gen() % 4),
            C = 1 + static_cast<int>(gen() % 7);
  for (int v = 0; v < V; ++v) g.vm_host.push_back(static_cast<int>(gen() % P));
  for (int c = 0; c < C; ++c) g.container_host.push_back(static_cast<int>(gen() % V));
  g.pm_ids.resize(P);
  g.vm_ids.resize(V);
  g.container_ids.resize(C);
  std::iota(g.pm_ids.begin(), g.pm_ids.end(), 0);
  std::iota(g.vm_ids.begin(), g.vm_ids.end(), 0);
  std::iota(g.container_ids.begin(), g.container_ids.end(), 0);
  std::uniform_real_distribution<double> u(0, 1);
  g.pm_features = Eigen::MatrixXd::NullaryExpr(P, kPmFeatures, [&] { return u(gen); });
  g.vm_features = Eigen::MatrixXd::NullaryExpr(V, kVmFeatures, [&] { return u(gen); });
  g.container_features = Eigen::MatrixXd::NullaryExpr(C, kContainerFeatures, [&] { return u(gen); });
  g.pm_adjacency = random_adjacency(gen, P);
  g.vm_adjacency = random_adjacency(gen, V);
  g.container_adjacency = random_adjacency(gen, C);
  return g;
}

inline std::vector<int> random_perm(std::mt19937_64& gen, int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), gen);
  return p;
}

inline Adjacency relabel(const Adjacency& adj, const std::vector<int>& perm) {
  Adjacency out(adj.size());
  for (std::size_t i = 0; i < adj.size(); ++i) {
    for (int j : adj[i]) out[perm[i]].push_back(perm[j]);
    std::sort(out[perm[i]].begin(), out[perm[i]].end());
  }
  return out;
}

inline Eigen::MatrixXd permute_rows(const Eigen::MatrixXd& m, const std::vector<int>& perm) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i) out.row(perm[i]) = m.row(i);
  return out;
}

// Node i of every layer becomes node perm[i].
inline HierGraph permute(const HierGraph& g, const std::vector<int>& pp, const std::vector<int>& vp,
                  const std::vector<int>& cp) {
  HierGraph h = g;
  h.pm_features = permute_rows(g.pm_features, pp);
  h.vm_features = permute_rows(g.vm_features, vp);
  h.container_features = permute_rows(g.container_features, cp);
  h.pm_adjacency = relabel(g.pm_adjacency, pp);
  h.vm_adjacency = relabel(g.vm_adjacency, vp);
  h.container_adjacency = relabel(g.container_adjacency, cp);
  for (int v = 0; v < g.vm_count(); ++v) h.vm_host[vp[v]] = pp[g.vm_host[v]];
  for (int c = 0; c < g.container_count(); ++c) h.container_host[cp[c]] = vp[g.container_host[c]];
  return h;
}

}  // namespace gatref
