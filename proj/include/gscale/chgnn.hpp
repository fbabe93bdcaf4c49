#pragma once

#include <optional>

#include <Eigen/Dense>

#include "gscale/hgraph.hpp"

namespace gscale {

inline constexpr double kLeakySlope = 0.2;

inline double leaky_relu(double x) { return x > 0.0 ? x : kLeakySlope * x; }
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Single-head graph attention layer.
struct GatLayerParams {
  Eigen::MatrixXd weight;     // F' x F
  Eigen::VectorXd attention;  // 2F'
};

struct DenseParams {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// in -> hidden (tanh) -> out (linear)
struct FeedForwardParams {
  DenseParams hidden;
  DenseParams output;
};

// Attention weights of `node` over adjacency[node], in adjacency order.
Eigen::VectorXd attention_coefficients(const GatLayerParams& layer, const Eigen::MatrixXd& features,
                                       const Adjacency& adjacency, int node);

// h'_i = sigmoid(sum_j alpha_ij W h_j); rows of `features` are nodes.
Eigen::MatrixXd gat_layer_forward(const GatLayerParams& layer, const Eigen::MatrixXd& features,
                                  const Adjacency& adjacency);

Eigen::MatrixXd dense_forward(const DenseParams& layer, const Eigen::MatrixXd& x);
Eigen::MatrixXd tanh_dense_forward(const DenseParams& layer, const Eigen::MatrixXd& x);
Eigen::MatrixXd feed_forward(const FeedForwardParams& ff, const Eigen::MatrixXd& x);

// Which machine layers feed embeddings upward.
enum class LayerAblation { None, Pm, PmVm };

struct ChgnnParams {
  std::optional<GatLayerParams> gat_pm;    // absent when the PM layer is ablated
  std::optional<GatLayerParams> gat_vm;    // absent when PM and VM layers are ablated
  std::optional<FeedForwardParams> ff_vm;
  GatLayerParams gat_container_1;
  GatLayerParams gat_container_2;
  FeedForwardParams ff_container;
};

// Bottom-up aggregation: PM embeddings are appended to their VMs' raw
// features, VM embeddings to their containers'. Returns C x d.
Eigen::MatrixXd chgnn_forward(const HierGraph& graph, const ChgnnParams& params);

}  // namespace gscale
