#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gscale/scaling.hpp"

namespace gscale {

struct ThresholdConfig {
  double upper = 0.8;
  double lower = 0.6;

  void validate() const;
};

// Threshold autoscaler over windowed container utilization: above `upper`
// adds a same-size replica, below `lower` removes the container (never the
// last replica of a microservice).
std::vector<ExecutedOps> aws_scale_step(CloudState& state, const ThresholdConfig& cfg = {});

// Requests one container of `vcpu` vCPUs can serve in one decision interval.
double replica_capacity(const CloudState& state, int ms, int vcpu);
double service_capacity(const CloudState& state, int ms);

// SMA forecast per microservice; 0 where no history exists yet.
std::vector<double> sma_predictions(const CloudState& state);

// Sizes each microservice to its forecast with 1-vCPU replicas: adds until
// capacity covers the forecast, removes the newest replica while the rest
// would still exceed it.
std::vector<ExecutedOps> proscale_step(CloudState& state, const std::vector<double>& predictions);

// Uniform <Ind, Scale> over the live containers and -m..m.
class RandomPolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed);
  ScalingAction next(int containers, int scale_bound);

 private:
  std::mt19937_64 gen_;
};

ScalingAction random_policy_step(const CloudState& state, RandomPolicy& policy);

}  // namespace gscale
