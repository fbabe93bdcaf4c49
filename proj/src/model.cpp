#include "gscale/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "gscale/error.hpp"
#include "gscale/hgraph.hpp"
#include "gscale/rng.hpp"

namespace gscale {

static_assert(std::endian::native == std::endian::little, "params.bin assumes a little-endian host");

namespace {

constexpr const char* kFormat = "gscale-params";
constexpr int kFormatVersion = 1;

int vm_input_dim(const ModelConfig& c) {
  return kVmFeatures + (c.ablation == LayerAblation::None ? c.embed_dim : 0);
}

int container_input_dim(const ModelConfig& c) {
  return kContainerFeatures + (c.ablation == LayerAblation::PmVm ? 0 : c.embed_dim);
}

// Visits every tensor in manifest order. Works for const and mutable params.
template <typename Params, typename Fn>
void visit(Params& p, const ModelConfig& c, Fn&& fn) {
  auto gat = [&](auto& layer, const std::string& name) {
    fn(name + ".weight", layer.weight);
    fn(name + ".attention", layer.attention);
  };
  auto dense = [&](auto& layer, const std::string& name) {
    fn(name + ".weight", layer.weight);
    fn(name + ".bias", layer.bias);
  };
  auto ff = [&](auto& block, const std::string& name) {
    dense(block.hidden, name + ".hidden");
    dense(block.output, name + ".output");
  };
  if (c.ablation == LayerAblation::None) gat(*p.chgnn.gat_pm, "gat_pm");
  if (c.ablation != LayerAblation::PmVm) {
    gat(*p.chgnn.gat_vm, "gat_vm");
    ff(*p.chgnn.ff_vm, "ff_vm");
  }
  gat(p.chgnn.gat_container_1, "gat_con1");
  gat(p.chgnn.gat_container_2, "gat_con2");
  ff(p.chgnn.ff_container, "ff_con");
  ff(p.policy.selector, "mlp_phi");
  dense(p.policy.scale_ff, "ff_scale");
  ff(p.policy.scorer, "mlp_omega");
}

GatLayerParams zero_gat(int out, int in) {
  return {Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(2 * out)};
}

DenseParams zero_dense(int out, int in) { return {Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)}; }

FeedForwardParams zero_ff(int in, int hidden, int out) { return {zero_dense(hidden, in), zero_dense(out, hidden)}; }

}  // namespace

void ModelConfig::validate() const {
  if (embed_dim < 1 || hidden_dim < 1) throw ConfigError("model widths must be >= 1");
  if (scale_bound < 0) throw ConfigError("scale bound must be >= 0");
}

std::string to_string(LayerAblation ablation) {
  switch (ablation) {
    case LayerAblation::None: return "none";
    case LayerAblation::Pm: return "pm";
    case LayerAblation::PmVm: return "pm+vm";
  }
  return "none";
}

LayerAblation parse_ablation(const std::string& text) {
  if (text == "none") return LayerAblation::None;
  if (text == "pm") return LayerAblation::Pm;
  if (text == "pm+vm") return LayerAblation::PmVm;
  throw ConfigError("unknown layer ablation '" + text + "' (expected none, pm or pm+vm)");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"ablation", to_string(ablation)},
          {"embed_dim", embed_dim},
          {"hidden_dim", hidden_dim},
          {"scale_bound", scale_bound},
          {"ablate_zeta", ablate_zeta}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& doc) {
  ModelConfig c;
  c.ablation = parse_ablation(doc.value("ablation", std::string("none")));
  c.embed_dim = doc.value("embed_dim", c.embed_dim);
  c.hidden_dim = doc.value("hidden_dim", c.hidden_dim);
  c.scale_bound = doc.value("scale_bound", c.scale_bound);
  c.ablate_zeta = doc.value("ablate_zeta", c.ablate_zeta);
  c.validate();
  return c;
}

ModelParams make_params(const ModelConfig& c) {
  c.validate();
  const int d = c.embed_dim;
  const int h = c.hidden_dim;
  ModelParams p;
  if (c.ablation == LayerAblation::None) p.chgnn.gat_pm = zero_gat(d, kPmFeatures);
  if (c.ablation != LayerAblation::PmVm) {
    p.chgnn.gat_vm = zero_gat(d, vm_input_dim(c));
    p.chgnn.ff_vm = zero_ff(d, h, d);
  }
  p.chgnn.gat_container_1 = zero_gat(d, container_input_dim(c));
  p.chgnn.gat_container_2 = zero_gat(d, d);
  p.chgnn.ff_container = zero_ff(d, h, d);
  p.policy.selector = zero_ff(d, h, 1);
  p.policy.scale_ff = zero_dense(d, d);
  p.policy.scorer = zero_ff(d + 1, h, 1);
  return p;
}

std::vector<ParamShape> param_manifest(const ModelConfig& config) {
  const ModelParams p = make_params(config);
  std::vector<ParamShape> shapes;
  visit(p, config, [&](const std::string& name, const auto& t) {
    shapes.push_back({name, static_cast<int>(t.rows()), static_cast<int>(t.cols())});
  });
  return shapes;
}

std::size_t param_count(const ModelConfig& config) {
  std::size_t n = 0;
  for (const auto& s : param_manifest(config)) n += static_cast<std::size_t>(s.rows) * s.cols;
  return n;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  ModelParams p = make_params(config);
  std::mt19937_64 gen(derive_seed(seed, 0x696e6974ULL, 0));
  visit(p, config, [&](const std::string& name, auto& t) {
    if (name.ends_with(".bias")) return;
    // weights are out x in; attention vectors see 2F' inputs
    const double fan_in = name.ends_with(".attention") ? static_cast<double>(t.rows()) : static_cast<double>(t.cols());
    const double bound = std::sqrt(1.0 / fan_in);
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = (2.0 * uniform01(gen) - 1.0) * bound;
    }
  });
  return p;
}

Eigen::VectorXd flatten(const ModelParams& params, const ModelConfig& config) {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(param_count(config)));
  Eigen::Index at = 0;
  visit(params, config, [&](const std::string&, const auto& t) {
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      for (Eigen::Index i = 0; i < t.rows(); ++i) theta(at++) = t(i, j);
    }
  });
  if (at != theta.size()) throw ConfigError("flatten: parameter shapes do not match the config");
  return theta;
}

ModelParams unflatten(const Eigen::VectorXd& theta, const ModelConfig& config) {
  if (static_cast<std::size_t>(theta.size()) != param_count(config)) {
    throw ConfigError("unflatten: expected " + std::to_string(param_count(config)) + " values, got " +
                      std::to_string(theta.size()));
  }
  ModelParams p = make_params(config);
  Eigen::Index at = 0;
  visit(p, config, [&](const std::string&, auto& t) {
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = theta(at++);
    }
  });
  return p;
}

void save_params(const std::filesystem::path& path, const Eigen::VectorXd& theta, const ModelConfig& config,
                 const nlohmann::json& extra) {
  if (static_cast<std::size_t>(theta.size()) != param_count(config)) {
    throw ConfigError("save_params: vector length does not match the config");
  }
  nlohmann::json header = extra;
  header["format"] = kFormat;
  header["version"] = kFormatVersion;
  header["count"] = theta.size();
  header["config"] = config.to_json();
  nlohmann::json shapes = nlohmann::json::array();
  for (const auto& s : param_manifest(config)) shapes.push_back({s.name, s.rows, s.cols});
  header["shapes"] = shapes;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(theta.data()), static_cast<std::streamsize>(theta.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

LoadedParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": missing header");
  LoadedParams loaded;
  try {
    loaded.header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": bad header: " + e.what());
  }
  if (loaded.header.value("format", std::string()) != kFormat) throw ParseError(path.string() + ": not a params file");
  if (loaded.header.value("version", 0) != kFormatVersion) throw ParseError(path.string() + ": unsupported version");
  loaded.config = ModelConfig::from_json(loaded.header.at("config"));
  const auto count = loaded.header.at("count").get<std::size_t>();
  if (count != param_count(loaded.config)) throw ParseError(path.string() + ": count does not match config");
  loaded.theta.resize(static_cast<Eigen::Index>(count));
  in.read(reinterpret_cast<char*>(loaded.theta.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double))) {
    throw ParseError(path.string() + ": truncated payload");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError(path.string() + ": trailing bytes");
  return loaded;
}

ScalingAction decide(const CloudState& state, const ModelParams& params, const ModelConfig& config,
                     double budget_usd) {
  GraphOptions options;
  options.budget_usd = budget_usd;
  options.ablate_zeta = config.ablate_zeta;
  const HierGraph graph = build_graph(state, options);
  const Eigen::MatrixXd emb = chgnn_forward(graph, params.chgnn);
  return act(emb, params.policy, ScaleCandidates(config.scale_bound));
}

}  // namespace gscale
