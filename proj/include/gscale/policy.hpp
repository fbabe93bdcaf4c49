#pragma once

#include <vector>

#include <Eigen/Dense>

#include "gscale/chgnn.hpp"
#include "gscale/scaling.hpp"

namespace gscale {

// Integers -m..m, strictly increasing.
struct ScaleCandidates {
  int bound = 4;
  std::vector<int> values;

  explicit ScaleCandidates(int m = 4);
  std::size_t size() const { return values.size(); }
};

struct PolicyParams {
  FeedForwardParams selector;  // MLP_phi: d -> hidden (tanh) -> 1
  DenseParams scale_ff;        // ff: d -> d, tanh
  FeedForwardParams scorer;    // MLP_omega: d + 1 -> hidden (tanh) -> 1
};

// p_i = MLP_phi(emb_i) for every row.
Eigen::VectorXd container_priorities(const Eigen::MatrixXd& embeddings, const PolicyParams& params);

// Argmax, lowest index on ties. Throws on an empty vector.
int argmax_lowest(const Eigen::VectorXd& scores);

// Argmax over candidate scores; ties go to the candidate closest to zero,
// then to the negative one.
int argmax_nearest_zero(const Eigen::VectorXd& scores, const std::vector<int>& candidates);

int select_container(const Eigen::MatrixXd& embeddings, const PolicyParams& params);

Eigen::VectorXd scale_priorities(const Eigen::RowVectorXd& embedding, const PolicyParams& params,
                                 const ScaleCandidates& candidates);
int select_scale(const Eigen::RowVectorXd& embedding, const PolicyParams& params, const ScaleCandidates& candidates);

ScalingAction act(const Eigen::MatrixXd& embeddings, const PolicyParams& params, const ScaleCandidates& candidates);

}  // namespace gscale
