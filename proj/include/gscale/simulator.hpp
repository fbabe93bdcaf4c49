#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "gscale/cloud.hpp"
#include "gscale/workload.hpp"

namespace gscale {

using ContainerId = int;
using VmId = int;
using PmId = int;

// Latency between issuing a scaling operation and the capacity taking effect.
struct TransientConfig {
  double horizontal_delay_s = 30.0;  // new container starts serving
  double vertical_delay_s = 1.0;     // resize becomes effective

  static TransientConfig normal_case() { return {30.0, 1.0}; }
  static TransientConfig worst_case() { return {180.0, 10.0}; }
  void validate() const;
};

struct ScenarioConfig {
  std::vector<VmType> vm_catalog = default_vm_catalog();
  int pm_cpu = 64;
  double pm_mem_gib = 3200.0;
  int pm_count = 4;
  std::string initial_vm_type = "m5.4xlarge";
  int initial_vm_count = 3;
  double decision_interval_s = kTimeUnitSeconds;
  TransientConfig transient;
  int sma_window = 5;
  int scale_bound = 4;  // m: Scale in [-m, m]
};

struct Pm {
  PmId id = 0;
  int cpu = 0;
  double mem_gib = 0.0;
};

struct Vm {
  VmId id = 0;
  std::string type;
  int vcpu = 0;
  double mem_gib = 0.0;
  double usd_per_hour = 0.0;
  PmId pm = 0;
  double rented_at = 0.0;                // start of the cost clock
  std::optional<double> released_at;     // end of the cost clock
  std::optional<double> empty_since;     // set while hosting no containers
  double last_art_ms = 0.0;              // mean task sojourn over the last window
  double last_utilization = 0.0;

  double cost_at(double clock) const;
};

struct TaskRef {
  std::int64_t request = 0;
  int ms = 0;
  double eligible_at = 0.0;  // all predecessors finished
};

struct RunningTask {
  TaskRef task;
  double start = 0.0;
  double finish = 0.0;
};

struct ContainerWindow {
  double busy_s = 0.0;
  int served = 0;
  double sojourn_ms_sum = 0.0;
};

struct Container {
  ContainerId id = 0;
  int ms = 0;
  int vcpu = 0;            // allocation target
  int effective_vcpu = 0;  // capacity used for tasks that start now
  VmId vm = 0;
  double ready_at = 0.0;
  bool retired = false;  // draining its running task, no longer dispatchable
  std::deque<TaskRef> queue;
  std::optional<RunningTask> running;
  ContainerWindow window;
  double last_utilization = 0.0;
  double last_art_ms = 0.0;
  std::int64_t wrr_current = 0;

  // vCPUs held on the host VM; covers in-flight resizes in either direction.
  int reserved() const { return std::max(vcpu, effective_vcpu); }
  bool ready(double clock) const { return clock >= ready_at; }
  std::size_t pending() const { return queue.size() + (running ? 1 : 0); }
};

struct TaskRecord {
  ContainerId container = -1;
  double eligible = 0.0;
  double start = 0.0;
  double exec_ms = 0.0;
  double finish = 0.0;
  bool done = false;

  double wait_s() const { return start - eligible; }
};

// Per-request workflow instance.
struct Request {
  std::int64_t id = 0;
  double arrival = 0.0;
  std::vector<int> remaining_preds;
  std::vector<TaskRecord> tasks;
  int sinks_left = 0;
  int outstanding = 0;  // tasks queued or running
  bool rejected = false;
};

struct NormStats {
  double art_max_ms = 1.0;
  double pending_max = 1.0;
  double predicted_max = 1.0;
};

enum class EventKind { Arrival, TaskFinish, ResizeEffective, ContainerReady };

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Arrival;
  std::int64_t subject = 0;
  int value = 0;

  bool operator>(const Event& other) const {
    if (time != other.time) return time > other.time;
    return seq > other.seq;
  }
};

struct Counters {
  std::int64_t admitted = 0;
  std::int64_t completed = 0;
  std::int64_t rejected = 0;
};

// Full simulation snapshot: machines, deployment maps, queues, in-flight
// workflows, response log and cost clocks. Single-threaded; copyable so that
// population members can run on independent replicas.
class CloudState {
 public:
  CloudState(std::shared_ptr<const AppSpec> app, ScenarioConfig config);

  const AppSpec& app() const { return *app_; }
  const ScenarioConfig& config() const { return config_; }
  double clock() const { return clock_; }
  double window_start() const { return window_start_; }

  const std::map<PmId, Pm>& pms() const { return pms_; }
  const std::map<VmId, Vm>& vms() const { return vms_; }
  const std::vector<Vm>& released_vms() const { return released_; }
  const std::map<ContainerId, Container>& containers() const { return containers_; }
  const Container& container(ContainerId id) const;
  const Vm& vm(VmId id) const;
  const Counters& counters() const { return counters_; }
  std::int64_t in_flight() const;
  const std::vector<double>& responses_ms() const { return responses_ms_; }
  const NormStats& norm() const { return norm_; }
  const WorkloadHistory& history(int ms) const { return history_.at(ms); }

  // Scaling targets in creation order; index = Ind.
  std::vector<ContainerId> container_list() const;
  std::vector<ContainerId> live_containers_of(int ms) const;
  int vm_used(VmId vm) const;
  int vm_remaining(VmId vm) const;
  int pm_used_cpu(PmId pm) const;
  double pm_used_mem(PmId pm) const;
  double total_cost() const { return total_cost_at(clock_); }
  double total_cost_at(double clock) const;
  double predicted_for(ContainerId id) const;
  std::size_t queued_tasks() const;

  // Throws SimulationError on any broken capacity or deployment invariant.
  void check_invariants() const;

  // Mutation primitives used by the scaling executor and baselines.
  VmId rent_vm(const VmType& type, PmId pm);
  ContainerId create_container(int ms, int vcpu, VmId vm, bool immediate = false);
  void resize_container(ContainerId id, int new_vcpu);
  void retire_container(ContainerId id);
  void release_vm(VmId id);

  // Request admission and dispatch.
  void schedule_arrival(double time);
  std::optional<ContainerId> dispatch_task(const TaskRef& task);

  // Processes every event with time < until (and at until when inclusive),
  // then sets the clock to until.
  void advance(double until);
  // Runs remaining events without arrivals until no work is left.
  void drain();
  void roll_window();

 private:
  std::optional<ContainerId> dispatch_task(const TaskRef& task, bool count_arrival);
  void push_event(double time, EventKind kind, std::int64_t subject, int value = 0);
  void handle(const Event& ev);
  void on_arrival(std::int64_t request_id);
  void on_task_finish(ContainerId id);
  void try_start(Container& con);
  void make_eligible(Request& req, int ms, double at);
  void reject(Request& req);
  void settle(Request& req);
  void erase_container(ContainerId id);
  void mark_vm_occupancy(VmId vm);

  std::shared_ptr<const AppSpec> app_;
  ScenarioConfig config_;
  double clock_ = 0.0;
  double window_start_ = 0.0;
  std::map<PmId, Pm> pms_;
  std::map<VmId, Vm> vms_;
  std::vector<Vm> released_;
  std::map<ContainerId, Container> containers_;
  std::map<std::int64_t, Request> requests_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t next_seq_ = 0;
  ContainerId next_container_ = 0;
  VmId next_vm_ = 0;
  std::int64_t next_request_ = 0;
  Counters counters_;
  std::vector<double> responses_ms_;
  std::vector<WorkloadHistory> history_;
  std::vector<std::int64_t> dispatched_;
  NormStats norm_;
};

// Capacity-proportional weights for the given vCPU allocations.
std::vector<double> cwrr_weights(std::span<const int> vcpus);

// Smooth weighted round-robin pick over `weights`, updating `current` in
// place. Returns the chosen position (ties: lowest position).
std::size_t smooth_wrr_pick(std::span<const std::int64_t> weights, std::span<std::int64_t> current);

// One container per microservice, 1 vCPU each, round-robin over the initial
// VMs, which are placed Best-Fit on the PM pool.
CloudState init_scenario(std::shared_ptr<const AppSpec> app, const ScenarioConfig& config);

enum class OpKind { NoOp, Vertical, Horizontal, Mixed, Delete };
std::string to_string(OpKind kind);

struct StepMetrics {
  int step = 0;
  std::int64_t admitted = 0;   // this step
  std::int64_t completed = 0;  // this step
  std::int64_t rejected = 0;   // this step
  std::int64_t in_flight = 0;  // at step end
  double step_art_ms = 0.0;    // 0 when nothing completed
  double cumulative_cost = 0.0;
  int action_ind = -1;
  int action_scale = 0;
  OpKind kind = OpKind::NoOp;
  int vertical_ops = 0;
  int horizontal_ops = 0;
  int noop_steps = 0;
  bool invalid_action = false;
  int placement_failures = 0;
  int live_containers = 0;
  int live_vms = 0;

  bool operator==(const StepMetrics&) const = default;
};

struct ScalingAction;
struct ExecutedOps;

// Classifies a step from the operations applied at its start.
OpKind classify_step(std::span<const ExecutedOps> ops);

// Admits `arrivals`, advances one decision interval and rolls the
// measurement window. `ops` are the operations applied at the step start and
// only feed the metrics.
StepMetrics run_step(CloudState& state, int step, std::span<const double> arrivals,
                     std::span<const ExecutedOps> ops);

// RL-style step: releases idle VMs, executes the action, then run_step.
StepMetrics env_step(CloudState& state, int step, const ScalingAction& action,
                     std::span<const double> arrivals);

}  // namespace gscale
