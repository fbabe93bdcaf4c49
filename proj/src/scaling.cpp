#include "gscale/scaling.hpp"

#include <algorithm>
#include <cstdlib>

#include "gscale/error.hpp"

namespace gscale {

ActionPlan plan_action(int scale, int max_vcpu, int con_vcpu) {
  ActionPlan plan;
  if (scale > 0) {
    if (max_vcpu > scale) {
      plan.branch = Branch::VerticalUp;
      plan.vertical_delta = scale;
    } else {
      // Take whatever headroom the host has and put the rest in a new
      // replica. When the headroom equals Scale exactly there is no rest.
      plan.branch = Branch::VerticalPlusNew;
      plan.vertical_delta = std::max(max_vcpu, 0);
      plan.new_container_vcpu = scale - plan.vertical_delta;
    }
  } else if (scale < 0) {
    if (con_vcpu > -scale) {
      plan.branch = Branch::VerticalDown;
      plan.vertical_delta = scale;
    } else {
      plan.branch = Branch::Delete;
      plan.delete_target = true;
    }
  }
  return plan;
}

namespace {

OpKind kind_of(int vertical_delta, bool created, bool deleted) {
  if (deleted) return OpKind::Delete;
  if (vertical_delta != 0 && created) return OpKind::Mixed;
  if (created) return OpKind::Horizontal;
  if (vertical_delta != 0) return OpKind::Vertical;
  return OpKind::NoOp;
}

}  // namespace

ExecutedOps execute_action(CloudState& state, const ScalingAction& action) {
  ExecutedOps ops;
  const auto list = state.container_list();
  const int m = state.config().scale_bound;
  if (action.ind < 0 || action.ind >= static_cast<int>(list.size()) || action.scale < -m || action.scale > m) {
    ops.invalid = true;
    return ops;
  }
  const ContainerId target = list[action.ind];
  ops.target = target;
  const Container& con = state.container(target);
  const ActionPlan plan = plan_action(action.scale, state.vm_remaining(con.vm), con.vcpu);

  switch (plan.branch) {
    case Branch::NoOp:
      break;
    case Branch::VerticalUp:
    case Branch::VerticalDown:
      state.resize_container(target, con.vcpu + plan.vertical_delta);
      ops.vcpu_delta = plan.vertical_delta;
      break;
    case Branch::VerticalPlusNew: {
      const int ms = con.ms;
      if (plan.vertical_delta > 0) {
        state.resize_container(target, con.vcpu + plan.vertical_delta);
        ops.vcpu_delta = plan.vertical_delta;
      }
      if (plan.new_container_vcpu > 0 && !add_replica(state, ms, plan.new_container_vcpu, &ops)) {
        ops.placement_failed = true;
      }
      break;
    }
    case Branch::Delete: {
      if (state.live_containers_of(con.ms).size() <= 1) {
        // Availability guard: keep the microservice alive at 1 vCPU.
        ops.guarded = true;
        if (con.vcpu > 1) {
          ops.vcpu_delta = 1 - con.vcpu;
          state.resize_container(target, 1);
        }
      } else {
        state.retire_container(target);
        ops.deleted.push_back(target);
      }
      break;
    }
  }
  ops.kind = kind_of(ops.vcpu_delta, !ops.created.empty(), !ops.deleted.empty());
  return ops;
}

std::optional<Placement> place_container(CloudState& state, int demand) {
  if (demand < 1) throw DomainError("place_container: demand must be >= 1");
  std::optional<VmId> best;
  int best_left = 0;
  for (const auto& [id, vm] : state.vms()) {
    const int left = state.vm_remaining(id);
    if (left < demand) continue;
    if (!best || left < best_left) {
      best = id;
      best_left = left;
    }
  }
  if (best) return Placement{*best, false};

  std::vector<const VmType*> types;
  for (const auto& t : state.config().vm_catalog) {
    if (t.vcpu >= demand) types.push_back(&t);
  }
  std::stable_sort(types.begin(), types.end(),
                   [](const VmType* a, const VmType* b) { return a->usd_per_hour < b->usd_per_hour; });
  for (const VmType* type : types) {
    std::optional<PmId> host;
    int host_left = 0;
    for (const auto& [pid, pm] : state.pms()) {
      const int left = pm.cpu - state.pm_used_cpu(pid);
      const double mem_left = pm.mem_gib - state.pm_used_mem(pid);
      if (left < type->vcpu || mem_left < type->mem_gib) continue;
      if (!host || left < host_left) {
        host = pid;
        host_left = left;
      }
    }
    if (host) return Placement{state.rent_vm(*type, *host), true};
  }
  return std::nullopt;
}

std::optional<ContainerId> add_replica(CloudState& state, int ms, int vcpu, ExecutedOps* ops) {
  auto placement = place_container(state, vcpu);
  if (!placement) return std::nullopt;
  const ContainerId id = state.create_container(ms, vcpu, placement->vm);
  if (ops) {
    ops->created.push_back(id);
    if (placement->rented) ops->rented_vm = placement->vm;
  }
  return id;
}

bool remove_replica(CloudState& state, ContainerId id) {
  const Container& con = state.container(id);
  if (con.retired || state.live_containers_of(con.ms).size() <= 1) return false;
  state.retire_container(id);
  return true;
}

std::vector<VmId> release_idle_vms(CloudState& state) {
  std::vector<VmId> idle;
  const double interval = state.config().decision_interval_s;
  for (const auto& [id, vm] : state.vms()) {
    if (vm.empty_since && state.clock() - *vm.empty_since >= interval) idle.push_back(id);
  }
  for (VmId id : idle) state.release_vm(id);
  return idle;
}

}  // namespace gscale
