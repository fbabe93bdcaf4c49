#include "gscale/policy.hpp"

#include <cstdlib>

#include "gscale/error.hpp"

namespace gscale {

ScaleCandidates::ScaleCandidates(int m) : bound(m) {
  if (m < 0) throw ConfigError("scale bound must be >= 0");
  for (int s = -m; s <= m; ++s) values.push_back(s);
}

Eigen::VectorXd container_priorities(const Eigen::MatrixXd& embeddings, const PolicyParams& params) {
  if (embeddings.rows() == 0) throw DomainError("select_container: no containers");
  return feed_forward(params.selector, embeddings).col(0);
}

int argmax_lowest(const Eigen::VectorXd& scores) {
  if (scores.size() == 0) throw DomainError("argmax of an empty vector");
  int best = 0;
  for (Eigen::Index i = 1; i < scores.size(); ++i) {
    if (scores(i) > scores(best)) best = static_cast<int>(i);
  }
  return best;
}

int argmax_nearest_zero(const Eigen::VectorXd& scores, const std::vector<int>& candidates) {
  if (scores.size() == 0 || scores.size() != static_cast<Eigen::Index>(candidates.size())) {
    throw DomainError("argmax_nearest_zero: size mismatch");
  }
  auto preferred = [&](int a, int b) {
    // true when candidate a wins a tie against b
    const int da = std::abs(candidates[a]);
    const int db = std::abs(candidates[b]);
    if (da != db) return da < db;
    return candidates[a] < candidates[b];
  };
  int best = 0;
  for (int j = 1; j < static_cast<int>(candidates.size()); ++j) {
    if (scores(j) > scores(best) || (scores(j) == scores(best) && preferred(j, best))) best = j;
  }
  return best;
}

int select_container(const Eigen::MatrixXd& embeddings, const PolicyParams& params) {
  return argmax_lowest(container_priorities(embeddings, params));
}

Eigen::VectorXd scale_priorities(const Eigen::RowVectorXd& embedding, const PolicyParams& params,
                                 const ScaleCandidates& candidates) {
  const Eigen::RowVectorXd hidden = tanh_dense_forward(params.scale_ff, embedding).row(0);
  const auto l = static_cast<Eigen::Index>(candidates.size());
  Eigen::MatrixXd inputs(l, hidden.size() + 1);
  const double norm = candidates.bound > 0 ? static_cast<double>(candidates.bound) : 1.0;
  for (Eigen::Index j = 0; j < l; ++j) {
    inputs.row(j).head(hidden.size()) = hidden;
    inputs(j, hidden.size()) = candidates.values[j] / norm;
  }
  return feed_forward(params.scorer, inputs).col(0);
}

int select_scale(const Eigen::RowVectorXd& embedding, const PolicyParams& params, const ScaleCandidates& candidates) {
  const Eigen::VectorXd p = scale_priorities(embedding, params, candidates);
  return candidates.values[argmax_nearest_zero(p, candidates.values)];
}

ScalingAction act(const Eigen::MatrixXd& embeddings, const PolicyParams& params, const ScaleCandidates& candidates) {
  ScalingAction a;
  a.ind = select_container(embeddings, params);
  a.scale = select_scale(embeddings.row(a.ind), params, candidates);
  return a;
}

}  // namespace gscale
