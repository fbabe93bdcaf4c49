#include "gscale/erl.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "gscale/error.hpp"
#include "gscale/rng.hpp"

namespace gscale {

std::string to_string(FitnessShaping shaping) {
  switch (shaping) {
    case FitnessShaping::None: return "none";
    case FitnessShaping::CenteredRank: return "rank";
    case FitnessShaping::Standardized: return "zscore";
  }
  return "none";
}

FitnessShaping parse_shaping(const std::string& text) {
  if (text == "none") return FitnessShaping::None;
  if (text == "rank") return FitnessShaping::CenteredRank;
  if (text == "zscore") return FitnessShaping::Standardized;
  throw ConfigError("unknown fitness shaping '" + text + "' (expected none, rank or zscore)");
}

void ErlConfig::validate() const {
  if (population < 2) throw ConfigError("population must be >= 2");
  if (mirrored && population % 2 != 0) throw ConfigError("mirrored sampling needs an even population");
  if (max_gen < 0) throw ConfigError("max_gen must be >= 0");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

Eigen::VectorXd sample_noise(Eigen::Index dim, std::uint64_t seed, int gen, int index) {
  NormalSampler normal(derive_seed(seed, static_cast<std::uint64_t>(gen), static_cast<std::uint64_t>(index)));
  Eigen::VectorXd eps(dim);
  for (Eigen::Index k = 0; k < dim; ++k) eps(k) = normal();
  return eps;
}

Perturbation perturb(const Eigen::VectorXd& theta, double sigma, std::uint64_t seed, int gen, int index,
                     bool mirrored) {
  Perturbation p;
  if (mirrored) {
    p.eps = sample_noise(theta.size(), seed, gen, index / 2);
    if (index % 2 == 1) p.eps = -p.eps;
  } else {
    p.eps = sample_noise(theta.size(), seed, gen, index);
  }
  p.theta = theta + sigma * p.eps;
  return p;
}

Eigen::VectorXd shape_fitness(std::span<const double> fitness, FitnessShaping shaping) {
  std::vector<double> finite;
  for (double f : fitness) {
    if (std::isfinite(f)) finite.push_back(f);
  }
  const auto n = static_cast<Eigen::Index>(finite.size());
  Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(finite.data(), n);
  if (n == 0 || shaping == FitnessShaping::None) return u;
  if (shaping == FitnessShaping::Standardized) {
    const double mean = u.mean();
    const double sd = std::sqrt((u.array() - mean).square().sum() / static_cast<double>(n));
    if (sd == 0.0) return Eigen::VectorXd::Zero(n);
    return (u.array() - mean) / sd;
  }
  // Centered ranks in [-0.5, 0.5]; equal fitness shares the mean rank.
  if (n == 1) return Eigen::VectorXd::Zero(1);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return finite[a] < finite[b]; });
  Eigen::VectorXd ranks(n);
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && finite[order[j + 1]] == finite[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) ranks(order[k]) = r;
    i = j + 1;
  }
  return ranks.array() / static_cast<double>(n - 1) - 0.5;
}

Eigen::VectorXd estimate_gradient(const std::vector<Eigen::VectorXd>& eps, std::span<const double> fitness,
                                  double sigma, FitnessShaping shaping) {
  if (eps.size() != fitness.size()) throw DomainError("estimate_gradient: eps/fitness size mismatch");
  if (eps.empty()) throw TrainingError("estimate_gradient: empty population");
  const Eigen::VectorXd utility = shape_fitness(fitness, shaping);
  if (utility.size() == 0) throw TrainingError("every individual failed: no finite fitness");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(eps.front().size());
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!std::isfinite(fitness[i])) continue;
    g += utility(k++) * eps[i];
  }
  return g / (static_cast<double>(utility.size()) * sigma);
}

Adam::Adam(Eigen::Index dim, double lr, double beta1, double beta2, double epsilon)
    : lr_(lr), beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(Eigen::VectorXd::Zero(dim)),
      v_(Eigen::VectorXd::Zero(dim)) {}

Eigen::VectorXd Adam::step(const Eigen::VectorXd& gradient) {
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * gradient;
  v_ = beta2_ * v_ + (1.0 - beta2_) * gradient.cwiseProduct(gradient);
  const double c1 = 1.0 - std::pow(beta1_, t_);
  const double c2 = 1.0 - std::pow(beta2_, t_);
  return lr_ * (m_ / c1).array() / ((v_ / c2).array().sqrt() + epsilon_);
}

namespace {

std::vector<Evaluation> evaluate_population(const std::vector<Perturbation>& pop, int gen, const FitnessFn& fitness,
                                            int workers) {
  std::vector<Evaluation> out(pop.size());
  auto run_one = [&](std::size_t i) {
    try {
      out[i] = fitness(pop[i].theta, gen, static_cast<int>(i));
    } catch (const std::exception&) {
      out[i] = Evaluation{-std::numeric_limits<double>::infinity(), 0.0, 0.0};
    }
  };
  if (workers <= 1 || pop.size() < 2) {
    for (std::size_t i = 0; i < pop.size(); ++i) run_one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(workers), pop.size());
  for (std::size_t w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < pop.size(); i = next++) run_one(i);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace

TrainResult train(const ErlConfig& config, const Eigen::VectorXd& theta0, const FitnessFn& fitness,
                  const GenerationCallback& on_generation) {
  config.validate();
  TrainResult result;
  result.theta = theta0;
  result.best_theta = theta0;
  Adam adam(theta0.size(), config.lr);

  for (int gen = 0; gen < config.max_gen; ++gen) {
    std::vector<Perturbation> pop;
    pop.reserve(static_cast<std::size_t>(config.population));
    for (int i = 0; i < config.population; ++i) {
      pop.push_back(perturb(result.theta, config.sigma, config.seed, gen, i, config.mirrored));
    }
    const std::vector<Evaluation> evals = evaluate_population(pop, gen, fitness, config.workers);

    std::vector<double> f(evals.size());
    std::vector<Eigen::VectorXd> eps(evals.size());
    CurvePoint point;
    point.gen = gen;
    point.best_fitness = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    int finite = 0;
    for (std::size_t i = 0; i < evals.size(); ++i) {
      f[i] = evals[i].fitness;
      eps[i] = std::move(pop[i].eps);
      if (!std::isfinite(f[i])) continue;
      sum += f[i];
      ++finite;
      if (f[i] > point.best_fitness) {
        point.best_fitness = f[i];
        point.best_art_ms = evals[i].art_ms;
        point.best_cost = evals[i].cost;
        if (f[i] > result.best_fitness) {
          result.best_fitness = f[i];
          result.best_theta = pop[i].theta;
        }
      }
    }
    if (finite == 0) throw TrainingError("generation " + std::to_string(gen) + ": every individual failed");
    point.mean_fitness = sum / finite;

    const Eigen::VectorXd g = estimate_gradient(eps, f, config.sigma, config.shaping);
    result.theta += adam.step(g);
    if (!result.theta.allFinite()) {
      throw TrainingError("generation " + std::to_string(gen) + ": parameters became non-finite");
    }
    result.curve.push_back(point);
    if (on_generation) on_generation(point);
  }
  return result;
}

}  // namespace gscale
