#include "gscale/baselines.hpp"

#include "gscale/error.hpp"
#include "gscale/rng.hpp"

namespace gscale {

void ThresholdConfig::validate() const {
  if (!(lower > 0.0 && lower < upper && upper <= 1.0)) throw ConfigError("thresholds need 0 < lower < upper <= 1");
}

std::vector<ExecutedOps> aws_scale_step(CloudState& state, const ThresholdConfig& cfg) {
  cfg.validate();
  std::vector<ExecutedOps> out;
  for (ContainerId id : state.container_list()) {
    const Container& con = state.container(id);
    if (con.retired) continue;
    const double util = con.last_utilization;
    ExecutedOps ops;
    ops.target = id;
    if (util > cfg.upper) {
      if (add_replica(state, con.ms, con.vcpu, &ops)) {
        ops.kind = OpKind::Horizontal;
      } else {
        ops.placement_failed = true;
      }
    } else if (util < cfg.lower) {
      if (remove_replica(state, id)) {
        ops.deleted.push_back(id);
        ops.kind = OpKind::Delete;
      } else {
        ops.guarded = true;
      }
    }
    out.push_back(std::move(ops));
  }
  return out;
}

double replica_capacity(const CloudState& state, int ms, int vcpu) {
  const double et_ms = execution_time(state.app().et_ms(ms), vcpu);
  return state.config().decision_interval_s * 1000.0 / et_ms;
}

double service_capacity(const CloudState& state, int ms) {
  double total = 0.0;
  for (ContainerId id : state.live_containers_of(ms)) total += replica_capacity(state, ms, state.container(id).vcpu);
  return total;
}

std::vector<double> sma_predictions(const CloudState& state) {
  std::vector<double> out(static_cast<std::size_t>(state.app().size()), 0.0);
  for (int ms = 0; ms < state.app().size(); ++ms) {
    const auto& hist = state.history(ms);
    if (!hist.empty()) out[ms] = sma_predict(hist);
  }
  return out;
}

std::vector<ExecutedOps> proscale_step(CloudState& state, const std::vector<double>& predictions) {
  if (static_cast<int>(predictions.size()) != state.app().size()) {
    throw DomainError("proscale_step: one prediction per microservice required");
  }
  std::vector<ExecutedOps> out;
  for (int ms = 0; ms < state.app().size(); ++ms) {
    const double want = predictions[ms];
    double have = service_capacity(state, ms);
    while (have < want) {
      ExecutedOps ops;
      auto id = add_replica(state, ms, 1, &ops);
      if (!id) {
        ops.placement_failed = true;
        out.push_back(std::move(ops));
        break;
      }
      ops.target = *id;
      ops.kind = OpKind::Horizontal;
      have += replica_capacity(state, ms, 1);
      out.push_back(std::move(ops));
    }
    for (;;) {
      const auto live = state.live_containers_of(ms);
      if (live.size() <= 1) break;
      const ContainerId newest = live.back();
      const double cap = replica_capacity(state, ms, state.container(newest).vcpu);
      if (!(have - want > cap)) break;
      remove_replica(state, newest);
      have -= cap;
      ExecutedOps ops;
      ops.target = newest;
      ops.kind = OpKind::Delete;
      ops.deleted.push_back(newest);
      out.push_back(std::move(ops));
    }
  }
  return out;
}

RandomPolicy::RandomPolicy(std::uint64_t seed) : gen_(derive_seed(seed, 0x72616e64ULL, 0)) {}

ScalingAction RandomPolicy::next(int containers, int scale_bound) {
  if (containers < 1) throw DomainError("random policy: no containers");
  ScalingAction a;
  a.ind = static_cast<int>(uniform_index(gen_, static_cast<std::uint64_t>(containers)));
  a.scale = static_cast<int>(uniform_index(gen_, static_cast<std::uint64_t>(2 * scale_bound + 1))) - scale_bound;
  return a;
}

ScalingAction random_policy_step(const CloudState& state, RandomPolicy& policy) {
  return policy.next(static_cast<int>(state.container_list().size()), state.config().scale_bound);
}

}  // namespace gscale
