#include "gscale/chgnn.hpp"

#include <algorithm>
#include <cmath>

#include "gscale/error.hpp"

namespace gscale {

namespace {

void check_layer(const GatLayerParams& layer, const Eigen::MatrixXd& features) {
  if (layer.weight.cols() != features.cols()) throw ConfigError("GAT layer: input width mismatch");
  if (layer.attention.size() != 2 * layer.weight.rows()) throw ConfigError("GAT layer: attention size mismatch");
}

// Gathers rows of `source` per node index.
Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& source, const std::vector<int>& index) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(index.size()), source.cols());
  for (std::size_t i = 0; i < index.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = source.row(index[i]);
  return out;
}

Eigen::MatrixXd concat_columns(const Eigen::MatrixXd& left, const Eigen::MatrixXd& right) {
  Eigen::MatrixXd out(left.rows(), left.cols() + right.cols());
  out << left, right;
  return out;
}

Eigen::VectorXd softmax_scores(const Eigen::VectorXd& src_score, const Eigen::VectorXd& dst_score,
                               const std::vector<int>& neighbours, int node) {
  Eigen::VectorXd logits(static_cast<Eigen::Index>(neighbours.size()));
  for (std::size_t k = 0; k < neighbours.size(); ++k) {
    logits(static_cast<Eigen::Index>(k)) = leaky_relu(src_score(node) + dst_score(neighbours[k]));
  }
  const double peak = logits.maxCoeff();
  Eigen::VectorXd alpha = (logits.array() - peak).exp();
  return alpha / alpha.sum();
}

}  // namespace

Eigen::VectorXd attention_coefficients(const GatLayerParams& layer, const Eigen::MatrixXd& features,
                                       const Adjacency& adjacency, int node) {
  check_layer(layer, features);
  const auto width = layer.weight.rows();
  Eigen::MatrixXd projected = features * layer.weight.transpose();
  Eigen::VectorXd src = projected * layer.attention.head(width);
  Eigen::VectorXd dst = projected * layer.attention.tail(width);
  return softmax_scores(src, dst, adjacency.at(node), node);
}

Eigen::MatrixXd gat_layer_forward(const GatLayerParams& layer, const Eigen::MatrixXd& features,
                                  const Adjacency& adjacency) {
  check_layer(layer, features);
  if (static_cast<Eigen::Index>(adjacency.size()) != features.rows()) {
    throw ConfigError("GAT layer: adjacency/feature row mismatch");
  }
  const auto width = layer.weight.rows();
  Eigen::MatrixXd projected = features * layer.weight.transpose();  // n x F'
  Eigen::VectorXd src = projected * layer.attention.head(width);
  Eigen::VectorXd dst = projected * layer.attention.tail(width);
  Eigen::MatrixXd out(features.rows(), width);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const auto& neighbours = adjacency[i];
    if (neighbours.empty()) throw ConfigError("GAT layer: empty neighbourhood");
    Eigen::VectorXd alpha = softmax_scores(src, dst, neighbours, static_cast<int>(i));
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(width);
    for (std::size_t k = 0; k < neighbours.size(); ++k) {
      acc += alpha(static_cast<Eigen::Index>(k)) * projected.row(neighbours[k]);
    }
    out.row(i) = acc.unaryExpr([](double x) { return logistic(x); });
  }
  return out;
}

Eigen::MatrixXd dense_forward(const DenseParams& layer, const Eigen::MatrixXd& x) {
  if (layer.weight.cols() != x.cols()) throw ConfigError("dense layer: input width mismatch");
  Eigen::MatrixXd y = x * layer.weight.transpose();
  y.rowwise() += layer.bias.transpose();
  return y;
}

Eigen::MatrixXd tanh_dense_forward(const DenseParams& layer, const Eigen::MatrixXd& x) {
  return dense_forward(layer, x).array().tanh().matrix();
}

Eigen::MatrixXd feed_forward(const FeedForwardParams& ff, const Eigen::MatrixXd& x) {
  return dense_forward(ff.output, tanh_dense_forward(ff.hidden, x));
}

Eigen::MatrixXd chgnn_forward(const HierGraph& graph, const ChgnnParams& params) {
  Eigen::MatrixXd container_input = graph.container_features;
  if (params.gat_vm) {
    Eigen::MatrixXd vm_input = graph.vm_features;
    if (params.gat_pm) {
      Eigen::MatrixXd pm_emb = gat_layer_forward(*params.gat_pm, graph.pm_features, graph.pm_adjacency);
      vm_input = concat_columns(vm_input, gather_rows(pm_emb, graph.vm_host));
    }
    Eigen::MatrixXd vm_emb = gat_layer_forward(*params.gat_vm, vm_input, graph.vm_adjacency);
    vm_emb = feed_forward(*params.ff_vm, vm_emb);
    container_input = concat_columns(container_input, gather_rows(vm_emb, graph.container_host));
  }
  Eigen::MatrixXd h = gat_layer_forward(params.gat_container_1, container_input, graph.container_adjacency);
  h = gat_layer_forward(params.gat_container_2, h, graph.container_adjacency);
  return feed_forward(params.ff_container, h);
}

}  // namespace gscale
