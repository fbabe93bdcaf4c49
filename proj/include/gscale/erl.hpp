#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gscale {

enum class FitnessShaping { None, CenteredRank, Standardized };
std::string to_string(FitnessShaping shaping);
FitnessShaping parse_shaping(const std::string& text);

struct ErlConfig {
  int population = 40;
  int max_gen = 1000;
  double lr = 0.01;
  double sigma = 0.05;
  std::uint64_t seed = 0;
  FitnessShaping shaping = FitnessShaping::None;
  bool mirrored = false;  // individuals 2k and 2k+1 share noise with opposite signs
  int workers = 1;

  void validate() const;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Standard-normal noise keyed by (seed, gen, i).
Eigen::VectorXd sample_noise(Eigen::Index dim, std::uint64_t seed, int gen, int index);

struct Perturbation {
  Eigen::VectorXd theta;
  Eigen::VectorXd eps;
};

Perturbation perturb(const Eigen::VectorXd& theta, double sigma, std::uint64_t seed, int gen, int index,
                     bool mirrored = false);

// Shaped utilities for the finite entries of `fitness`, in order.
Eigen::VectorXd shape_fitness(std::span<const double> fitness, FitnessShaping shaping);

// g = 1/(N sigma) sum F_i eps_i over individuals with finite fitness (N counts
// only those). Throws TrainingError when no fitness is finite.
Eigen::VectorXd estimate_gradient(const std::vector<Eigen::VectorXd>& eps, std::span<const double> fitness,
                                  double sigma, FitnessShaping shaping = FitnessShaping::None);

// Adam in ascent form: theta += step(g).
class Adam {
 public:
  Adam(Eigen::Index dim, double lr, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);
  Eigen::VectorXd step(const Eigen::VectorXd& gradient);
  int iterations() const { return t_; }

 private:
  double lr_, beta1_, beta2_, epsilon_;
  Eigen::VectorXd m_, v_;
  int t_ = 0;
};

struct Evaluation {
  double fitness = 0.0;
  double art_ms = 0.0;
  double cost = 0.0;
};

// Must be safe to call concurrently when workers > 1.
using FitnessFn = std::function<Evaluation(const Eigen::VectorXd& theta, int gen, int index)>;

struct CurvePoint {
  int gen = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  double best_art_ms = 0.0;
  double best_cost = 0.0;

  bool operator==(const CurvePoint&) const = default;
};

struct TrainResult {
  Eigen::VectorXd theta;       // final centre
  Eigen::VectorXd best_theta;  // best individual seen
  double best_fitness = -std::numeric_limits<double>::infinity();
  std::vector<CurvePoint> curve;
};

using GenerationCallback = std::function<void(const CurvePoint&)>;

TrainResult train(const ErlConfig& config, const Eigen::VectorXd& theta0, const FitnessFn& fitness,
                  const GenerationCallback& on_generation = {});

}  // namespace gscale
