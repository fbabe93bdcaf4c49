#pragma once

#include <optional>
#include <vector>

#include "gscale/simulator.hpp"

namespace gscale {

// <Ind, Scale>: which container (index into container_list) and how many
// vCPUs to add (positive) or remove (negative).
struct ScalingAction {
  int ind = 0;
  int scale = 0;

  bool operator==(const ScalingAction&) const = default;
};

struct ExecutedOps {
  OpKind kind = OpKind::NoOp;
  ContainerId target = -1;
  int vcpu_delta = 0;  // applied to the target
  std::vector<ContainerId> created;
  std::vector<ContainerId> deleted;
  std::optional<VmId> rented_vm;
  bool invalid = false;           // stale Ind or out-of-range Scale
  bool guarded = false;           // last-replica delete turned into a shrink
  bool placement_failed = false;  // no host for the horizontal part
};

// Branch chosen by the executor for a given (Scale, VM headroom, container size).
enum class Branch { NoOp, VerticalUp, VerticalPlusNew, VerticalDown, Delete };

struct ActionPlan {
  Branch branch = Branch::NoOp;
  int vertical_delta = 0;
  int new_container_vcpu = 0;  // 0: nothing to create
  bool delete_target = false;

  bool operator==(const ActionPlan&) const = default;
};

// Pure decision logic of the executor. `max_vcpu` is the remaining capacity of
// the target's VM, `con_vcpu` the target's current allocation.
ActionPlan plan_action(int scale, int max_vcpu, int con_vcpu);

ExecutedOps execute_action(CloudState& state, const ScalingAction& action);

struct Placement {
  VmId vm = -1;
  bool rented = false;
};

// Best-Fit: the live VM with the least remaining capacity that still fits
// `demand` (ties: lowest id); otherwise rents the cheapest catalog type with
// enough vCPUs that fits on some PM. nullopt when nothing fits anywhere.
std::optional<Placement> place_container(CloudState& state, int demand);

// Creates a `vcpu`-sized replica of `ms` on a Best-Fit host.
std::optional<ContainerId> add_replica(CloudState& state, int ms, int vcpu, ExecutedOps* ops = nullptr);

// Retires a container unless it is the last live replica of its microservice.
bool remove_replica(CloudState& state, ContainerId id);

// Releases VMs that have hosted no container for at least one decision interval.
std::vector<VmId> release_idle_vms(CloudState& state);

}  // namespace gscale
