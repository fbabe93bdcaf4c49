#include <doctest.h>

#include <cmath>
#include <random>

#include "gscale/chgnn.hpp"
#include "gscale/error.hpp"
#include "gscale/model.hpp"
#include "gat_reference.hpp"

using namespace gscale;
using namespace gatref;

TEST_CASE("attention examples") {
  std::mt19937_64 gen(1);
  GatLayerParams layer = random_layer(gen, 3, 4);
  Eigen::MatrixXd h = random_matrix(gen, 2, 3);
  CHECK(attention_coefficients(layer, h, Adjacency{{0}, {1}}, 0)(0) == 1.0);

  Eigen::MatrixXd same(3, 3);
  same.row(0) << 0.1, 0.2, 0.3;
  same.row(1) << 0.5, 0.5, 0.5;
  same.row(2) << 0.5, 0.5, 0.5;
  Eigen::VectorXd a = attention_coefficients(layer, same, Adjacency{{0, 1, 2}, {1}, {2}}, 0);
  REQUIRE(a.size() == 3);
  CHECK(a(1) == doctest::Approx(a(2)).epsilon(1e-15));
  Eigen::VectorXd pair = attention_coefficients(layer, same, Adjacency{{0}, {1, 2}, {2}}, 1);
  CHECK(pair(0) == doctest::Approx(0.5));
  CHECK(pair(1) == doctest::Approx(0.5));
}

TEST_CASE("gat_layer_forward examples") {
  std::mt19937_64 gen(2);
  GatLayerParams zero{Eigen::MatrixXd::Zero(4, 3), random_matrix(gen, 8, 1)};
  Eigen::MatrixXd h = random_matrix(gen, 3, 3);
  Adjacency adj{{0, 1}, {1, 2}, {0, 2}};
  Eigen::MatrixXd out = gat_layer_forward(zero, h, adj);
  CHECK((out.array() == 0.5).all());

  GatLayerParams layer = random_layer(gen, 3, 4);
  Eigen::MatrixXd single = random_matrix(gen, 1, 3);
  Eigen::MatrixXd want = (single * layer.weight.transpose()).unaryExpr([](double x) { return logistic(x); });
  CHECK((gat_layer_forward(layer, single, Adjacency{{0}}) - want).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(gat_layer_forward(layer, random_matrix(gen, 3, 5), adj), ConfigError);
  CHECK_THROWS_AS(gat_layer_forward(layer, h, Adjacency{{0}, {1}}), ConfigError);
  CHECK_THROWS_AS(gat_layer_forward(layer, h, Adjacency{{0}, {}, {2}}), ConfigError);
  GatLayerParams bad = layer;
  bad.attention = Eigen::VectorXd::Zero(5);
  CHECK_THROWS_AS(gat_layer_forward(bad, h, adj), ConfigError);
}

TEST_CASE("GAT matches the reference transcription") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 8), fin = 1 + static_cast<int>(gen() % 10),
              fout = 1 + static_cast<int>(gen() % 10);
    GatLayerParams layer = random_layer(gen, fin, fout);
    Eigen::MatrixXd h = random_matrix(gen, n, fin, 2.0);
    Adjacency adj = random_adjacency(gen, n);
    Eigen::MatrixXd got = gat_layer_forward(layer, h, adj);
    auto want = gat_oracle(layer, h, adj);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd alpha = attention_coefficients(layer, h, adj, i);
      CHECK(std::abs(alpha.sum() - 1.0) < 1e-12);
      for (int o = 0; o < fout; ++o) {
        CHECK(std::abs(got(i, o) - want[i][o]) < 1e-12);
        CHECK(got(i, o) > 0.0);
        CHECK(got(i, o) < 1.0);
      }
    }
  }
}

TEST_CASE("chgnn_forward shape, determinism and equivariance") {
  std::mt19937_64 gen(4);
  for (LayerAblation ab : {LayerAblation::None, LayerAblation::Pm, LayerAblation::PmVm}) {
    ModelConfig cfg;
    cfg.ablation = ab;
    const ModelParams params = init_params(cfg, 77);
    for (int trial = 0; trial < 40; ++trial) {
      const HierGraph g = random_graph(gen);
      const Eigen::MatrixXd emb = chgnn_forward(g, params.chgnn);
      CHECK(emb.rows() == g.container_count());
      CHECK(emb.cols() == 64);
      CHECK(emb.allFinite());
      CHECK(chgnn_forward(g, params.chgnn) == emb);

      const auto pp = random_perm(gen, g.pm_count());
      const auto vp = random_perm(gen, g.vm_count());
      const auto cp = random_perm(gen, g.container_count());
      const Eigen::MatrixXd moved = chgnn_forward(permute(g, pp, vp, cp), params.chgnn);
      for (int c = 0; c < g.container_count(); ++c) {
        CHECK((moved.row(cp[c]) - emb.row(c)).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("PM features only reach containers below that PM") {
  HierGraph g;
  g.pm_ids = {0, 1};
  g.vm_ids = {0, 1};
  g.container_ids = {0, 1, 2};
  g.vm_host = {0, 1};
  g.container_host = {0, 0, 1};
  g.pm_features = Eigen::MatrixXd::Constant(2, kPmFeatures, 0.3);
  g.vm_features = Eigen::MatrixXd::Constant(2, kVmFeatures, 0.4);
  g.container_features = Eigen::MatrixXd::Constant(3, kContainerFeatures, 0.5);
  g.pm_adjacency = {{0}, {1}};
  g.vm_adjacency = {{0}, {1}};
  g.container_adjacency = {{0}, {0, 1}, {2}};
  const ModelParams params = init_params(ModelConfig{}, 5);
  const Eigen::MatrixXd base = chgnn_forward(g, params.chgnn);
  HierGraph changed = g;
  changed.pm_features.row(1) << 0.9, 0.1;
  const Eigen::MatrixXd after = chgnn_forward(changed, params.chgnn);
  CHECK(after.row(0) == base.row(0));
  CHECK(after.row(1) == base.row(1));
  CHECK(after.row(2) != base.row(2));

  // a container edge from PM 1's subtree couples container 1 to it
  changed.container_adjacency = {{0}, {0, 1, 2}, {2}};
  HierGraph linked = g;
  linked.container_adjacency = changed.container_adjacency;
  const Eigen::MatrixXd l0 = chgnn_forward(linked, params.chgnn);
  const Eigen::MatrixXd l1 = chgnn_forward(changed, params.chgnn);
  CHECK(l1.row(0) == l0.row(0));
  CHECK(l1.row(1) != l0.row(1));
}
