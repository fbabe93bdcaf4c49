#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gscale/chgnn.hpp"
#include "gscale/policy.hpp"

namespace gscale {

struct ModelConfig {
  LayerAblation ablation = LayerAblation::None;
  int embed_dim = 64;
  int hidden_dim = 64;
  int scale_bound = 4;
  bool ablate_zeta = false;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& doc);
  bool operator==(const ModelConfig&) const = default;
};

std::string to_string(LayerAblation ablation);
LayerAblation parse_ablation(const std::string& text);  // none | pm | pm+vm

struct ModelParams {
  ChgnnParams chgnn;
  PolicyParams policy;
};

struct ParamShape {
  std::string name;
  int rows = 0;
  int cols = 0;  // 1 for vectors

  bool operator==(const ParamShape&) const = default;
};

// Tensors in flattening order (each stored column-major).
std::vector<ParamShape> param_manifest(const ModelConfig& config);
std::size_t param_count(const ModelConfig& config);

// Zero-filled parameters with the right shapes.
ModelParams make_params(const ModelConfig& config);
// Weights uniform in +-sqrt(1/fan_in), biases zero.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

Eigen::VectorXd flatten(const ModelParams& params, const ModelConfig& config);
ModelParams unflatten(const Eigen::VectorXd& theta, const ModelConfig& config);

// params.bin: one JSON header line, then the values as little-endian float64.
void save_params(const std::filesystem::path& path, const Eigen::VectorXd& theta, const ModelConfig& config,
                 const nlohmann::json& extra = nlohmann::json::object());
struct LoadedParams {
  Eigen::VectorXd theta;
  ModelConfig config;
  nlohmann::json header;
};
LoadedParams load_params(const std::filesystem::path& path);

// Full decision: graph snapshot -> embeddings -> <Ind, Scale>.
ScalingAction decide(const CloudState& state, const ModelParams& params, const ModelConfig& config,
                     double budget_usd);

}  // namespace gscale
