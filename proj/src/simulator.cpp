#include "gscale/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gscale/error.hpp"
#include "gscale/scaling.hpp"

namespace gscale {

void TransientConfig::validate() const {
  if (!(horizontal_delay_s >= 0.0) || !(vertical_delay_s >= 0.0)) {
    throw ConfigError("transient delays must be non-negative");
  }
}

double Vm::cost_at(double clock) const {
  double end = released_at ? std::min(*released_at, clock) : clock;
  if (end <= rented_at) return 0.0;
  return vm_cost(usd_per_hour, rented_at, end);
}

CloudState::CloudState(std::shared_ptr<const AppSpec> app, ScenarioConfig config)
    : app_(std::move(app)), config_(std::move(config)) {
  if (!app_) throw ConfigError("scenario needs an application");
  config_.transient.validate();
  if (config_.pm_count < 1 || config_.pm_cpu < 1) throw ConfigError("PM pool must be non-empty");
  if (!(config_.decision_interval_s > 0.0)) throw ConfigError("decision interval must be positive");
  if (config_.scale_bound < 0) throw ConfigError("scale bound must be non-negative");
  if (config_.vm_catalog.empty()) throw ConfigError("empty VM catalog");
  for (int p = 0; p < config_.pm_count; ++p) pms_.emplace(p, Pm{p, config_.pm_cpu, config_.pm_mem_gib});
  history_.assign(app_->size(), WorkloadHistory(config_.sma_window));
  dispatched_.assign(app_->size(), 0);
}

const Container& CloudState::container(ContainerId id) const {
  auto it = containers_.find(id);
  if (it == containers_.end()) throw SimulationError("unknown container " + std::to_string(id));
  return it->second;
}

const Vm& CloudState::vm(VmId id) const {
  auto it = vms_.find(id);
  if (it == vms_.end()) throw SimulationError("unknown VM " + std::to_string(id));
  return it->second;
}

std::int64_t CloudState::in_flight() const {
  return counters_.admitted - counters_.completed - counters_.rejected;
}

std::vector<ContainerId> CloudState::container_list() const {
  std::vector<ContainerId> ids;
  for (const auto& [id, con] : containers_) {
    if (!con.retired) ids.push_back(id);
  }
  return ids;
}

std::vector<ContainerId> CloudState::live_containers_of(int ms) const {
  std::vector<ContainerId> ids;
  for (const auto& [id, con] : containers_) {
    if (!con.retired && con.ms == ms) ids.push_back(id);
  }
  return ids;
}

int CloudState::vm_used(VmId vm) const {
  int used = 0;
  for (const auto& [id, con] : containers_) {
    if (con.vm == vm) used += con.reserved();
  }
  return used;
}

int CloudState::vm_remaining(VmId id) const { return vm(id).vcpu - vm_used(id); }

int CloudState::pm_used_cpu(PmId pm) const {
  int used = 0;
  for (const auto& [id, v] : vms_) {
    if (v.pm == pm) used += v.vcpu;
  }
  return used;
}

double CloudState::pm_used_mem(PmId pm) const {
  double used = 0.0;
  for (const auto& [id, v] : vms_) {
    if (v.pm == pm) used += v.mem_gib;
  }
  return used;
}

double CloudState::total_cost_at(double clock) const {
  double sum = 0.0;
  for (const auto& [id, v] : vms_) sum += v.cost_at(clock);
  for (const auto& v : released_) sum += v.cost_at(clock);
  return sum;
}

double CloudState::predicted_for(ContainerId id) const {
  const Container& con = container(id);
  const auto& hist = history_.at(con.ms);
  if (hist.empty() || con.retired) return 0.0;
  int total = 0;
  for (ContainerId other : live_containers_of(con.ms)) total += containers_.at(other).vcpu;
  if (total == 0) return 0.0;
  return sma_predict(hist) * static_cast<double>(con.vcpu) / static_cast<double>(total);
}

std::size_t CloudState::queued_tasks() const {
  std::size_t n = 0;
  for (const auto& [id, con] : containers_) n += con.pending();
  return n;
}

void CloudState::check_invariants() const {
  for (const auto& [vid, v] : vms_) {
    if (!pms_.count(v.pm)) throw SimulationError("VM " + std::to_string(vid) + " on unknown PM");
    if (vm_used(vid) > v.vcpu) throw SimulationError("VM " + std::to_string(vid) + " over-committed");
  }
  for (const auto& [pid, p] : pms_) {
    if (pm_used_cpu(pid) > p.cpu) throw SimulationError("PM " + std::to_string(pid) + " CPU over-committed");
    if (pm_used_mem(pid) > p.mem_gib) throw SimulationError("PM " + std::to_string(pid) + " memory over-committed");
  }
  std::vector<int> live_per_ms(app_->size(), 0);
  for (const auto& [cid, con] : containers_) {
    if (!vms_.count(con.vm)) throw SimulationError("container " + std::to_string(cid) + " on unknown VM");
    if (con.vcpu < 1 || con.effective_vcpu < 1) throw SimulationError("container with < 1 vCPU");
    if (!con.retired) ++live_per_ms[con.ms];
  }
  for (int ms = 0; ms < app_->size(); ++ms) {
    if (live_per_ms[ms] == 0) throw SimulationError("microservice " + std::to_string(ms) + " has no container");
  }
  std::int64_t open = 0;
  for (const auto& [rid, req] : requests_) {
    if (!req.rejected) ++open;
  }
  if (open != in_flight()) throw SimulationError("request conservation violated");
}

VmId CloudState::rent_vm(const VmType& type, PmId pm) {
  const Pm& host = pms_.at(pm);
  if (pm_used_cpu(pm) + type.vcpu > host.cpu || pm_used_mem(pm) + type.mem_gib > host.mem_gib) {
    throw SimulationError("PM " + std::to_string(pm) + " cannot host " + type.name);
  }
  Vm v;
  v.id = next_vm_++;
  v.type = type.name;
  v.vcpu = type.vcpu;
  v.mem_gib = type.mem_gib;
  v.usd_per_hour = type.usd_per_hour;
  v.pm = pm;
  v.rented_at = clock_;
  v.empty_since = clock_;
  vms_.emplace(v.id, v);
  return v.id;
}

ContainerId CloudState::create_container(int ms, int vcpu, VmId vm_id, bool immediate) {
  if (ms < 0 || ms >= app_->size()) throw SimulationError("unknown microservice");
  if (vcpu < 1) throw SimulationError("container needs at least one vCPU");
  if (vm_remaining(vm_id) < vcpu) throw SimulationError("VM " + std::to_string(vm_id) + " lacks capacity");
  Container con;
  con.id = next_container_++;
  con.ms = ms;
  con.vcpu = vcpu;
  con.effective_vcpu = vcpu;
  con.vm = vm_id;
  const double delay = immediate ? 0.0 : config_.transient.horizontal_delay_s;
  con.ready_at = clock_ + delay;
  containers_.emplace(con.id, std::move(con));
  if (delay > 0.0) push_event(clock_ + delay, EventKind::ContainerReady, next_container_ - 1);
  mark_vm_occupancy(vm_id);
  return next_container_ - 1;
}

void CloudState::resize_container(ContainerId id, int new_vcpu) {
  auto it = containers_.find(id);
  if (it == containers_.end() || it->second.retired) throw SimulationError("resize of a non-live container");
  Container& con = it->second;
  if (new_vcpu < 1) throw SimulationError("container needs at least one vCPU");
  const int after = vm_used(con.vm) - con.reserved() + std::max(new_vcpu, con.effective_vcpu);
  if (after > vm(con.vm).vcpu) throw SimulationError("resize exceeds VM capacity");
  con.vcpu = new_vcpu;
  if (config_.transient.vertical_delay_s > 0.0) {
    push_event(clock_ + config_.transient.vertical_delay_s, EventKind::ResizeEffective, id, new_vcpu);
  } else {
    con.effective_vcpu = new_vcpu;
  }
}

void CloudState::retire_container(ContainerId id) {
  auto it = containers_.find(id);
  if (it == containers_.end() || it->second.retired) throw SimulationError("retire of a non-live container");
  Container& con = it->second;
  con.retired = true;
  std::deque<TaskRef> orphaned;
  orphaned.swap(con.queue);
  const bool draining = con.running.has_value();
  if (!draining) erase_container(id);
  for (const TaskRef& task : orphaned) {
    auto req = requests_.find(task.request);
    if (req == requests_.end()) continue;
    if (req->second.rejected || !dispatch_task(task, false)) {
      --req->second.outstanding;
      reject(req->second);
      settle(req->second);
    }
  }
}

void CloudState::release_vm(VmId id) {
  auto it = vms_.find(id);
  if (it == vms_.end()) throw SimulationError("release of unknown VM");
  for (const auto& [cid, con] : containers_) {
    if (con.vm == id) throw SimulationError("release of an occupied VM");
  }
  it->second.released_at = clock_;
  released_.push_back(it->second);
  vms_.erase(it);
}

void CloudState::schedule_arrival(double time) {
  if (time < clock_) throw SimulationError("arrival in the past");
  push_event(time, EventKind::Arrival, 0);
}

std::optional<ContainerId> CloudState::dispatch_task(const TaskRef& task) { return dispatch_task(task, true); }

std::optional<ContainerId> CloudState::dispatch_task(const TaskRef& task, bool count_arrival) {
  std::vector<Container*> pool;
  for (auto& [id, con] : containers_) {
    if (!con.retired && con.ms == task.ms && con.ready(clock_)) pool.push_back(&con);
  }
  if (pool.empty()) {
    // Only replicas still starting up: queue there rather than reject.
    for (auto& [id, con] : containers_) {
      if (!con.retired && con.ms == task.ms) pool.push_back(&con);
    }
  }
  if (pool.empty()) return std::nullopt;
  std::vector<std::int64_t> weights(pool.size());
  std::vector<std::int64_t> current(pool.size());
  for (std::size_t k = 0; k < pool.size(); ++k) {
    weights[k] = pool[k]->vcpu;
    current[k] = pool[k]->wrr_current;
  }
  const std::size_t pick = smooth_wrr_pick(weights, current);
  for (std::size_t k = 0; k < pool.size(); ++k) pool[k]->wrr_current = current[k];
  Container& chosen = *pool[pick];
  chosen.queue.push_back(task);
  if (count_arrival) ++dispatched_[task.ms];
  try_start(chosen);
  return chosen.id;
}

void CloudState::advance(double until) {
  if (until < clock_) throw SimulationError("advance into the past");
  while (!events_.empty() && events_.top().time < until) {
    Event ev = events_.top();
    events_.pop();
    clock_ = ev.time;
    handle(ev);
  }
  clock_ = until;
}

void CloudState::drain() {
  while (!events_.empty()) {
    Event ev = events_.top();
    events_.pop();
    clock_ = std::max(clock_, ev.time);
    handle(ev);
  }
}

void CloudState::roll_window() {
  const double interval = clock_ - window_start_;
  if (interval <= 0.0) return;
  std::map<VmId, std::pair<double, int>> vm_sojourn;
  std::map<VmId, double> vm_busy_vcpu;
  for (auto& [id, con] : containers_) {
    if (con.running) con.window.busy_s += clock_ - std::max(con.running->start, window_start_);
    con.last_utilization = std::clamp(con.window.busy_s / interval, 0.0, 1.0);
    con.last_art_ms = con.window.served > 0 ? con.window.sojourn_ms_sum / con.window.served : 0.0;
    auto& acc = vm_sojourn[con.vm];
    acc.first += con.window.sojourn_ms_sum;
    acc.second += con.window.served;
    vm_busy_vcpu[con.vm] += con.last_utilization * con.vcpu;
    con.window = ContainerWindow{};
    norm_.art_max_ms = std::max(norm_.art_max_ms, con.last_art_ms);
    norm_.pending_max = std::max(norm_.pending_max, static_cast<double>(con.pending()));
  }
  for (auto& [id, v] : vms_) {
    auto acc = vm_sojourn[id];
    v.last_art_ms = acc.second > 0 ? acc.first / acc.second : 0.0;
    v.last_utilization = std::clamp(vm_busy_vcpu[id] / v.vcpu, 0.0, 1.0);
    norm_.art_max_ms = std::max(norm_.art_max_ms, v.last_art_ms);
  }
  for (int ms = 0; ms < app_->size(); ++ms) {
    history_[ms].push(static_cast<double>(dispatched_[ms]));
    dispatched_[ms] = 0;
  }
  for (const auto& [id, con] : containers_) {
    if (!con.retired) norm_.predicted_max = std::max(norm_.predicted_max, predicted_for(id));
  }
  window_start_ = clock_;
}

void CloudState::push_event(double time, EventKind kind, std::int64_t subject, int value) {
  events_.push(Event{time, next_seq_++, kind, subject, value});
}

void CloudState::handle(const Event& ev) {
  switch (ev.kind) {
    case EventKind::Arrival:
      on_arrival(ev.subject);
      break;
    case EventKind::TaskFinish:
      on_task_finish(static_cast<ContainerId>(ev.subject));
      break;
    case EventKind::ResizeEffective: {
      auto it = containers_.find(static_cast<ContainerId>(ev.subject));
      if (it != containers_.end()) it->second.effective_vcpu = ev.value;
      break;
    }
    case EventKind::ContainerReady: {
      auto it = containers_.find(static_cast<ContainerId>(ev.subject));
      if (it != containers_.end()) try_start(it->second);
      break;
    }
  }
}

void CloudState::on_arrival(std::int64_t) {
  const int n = app_->size();
  Request req;
  req.id = next_request_++;
  req.arrival = clock_;
  req.remaining_preds.resize(n);
  req.tasks.resize(n);
  for (int ms = 0; ms < n; ++ms) req.remaining_preds[ms] = static_cast<int>(app_->predecessors(ms).size());
  req.sinks_left = static_cast<int>(app_->sinks().size());
  ++counters_.admitted;
  auto [it, inserted] = requests_.emplace(req.id, std::move(req));
  for (int ms : app_->sources()) {
    if (it->second.rejected) break;
    make_eligible(it->second, ms, clock_);
  }
}

void CloudState::make_eligible(Request& req, int ms, double at) {
  req.tasks[ms].eligible = at;
  auto chosen = dispatch_task(TaskRef{req.id, ms, at}, true);
  if (!chosen) {
    reject(req);
    return;
  }
  ++req.outstanding;
}

void CloudState::reject(Request& req) {
  if (req.rejected) return;
  req.rejected = true;
  ++counters_.rejected;
}

void CloudState::settle(Request& req) {
  if (req.rejected && req.outstanding == 0) requests_.erase(req.id);
}

void CloudState::try_start(Container& con) {
  if (con.running || !con.ready(clock_)) return;
  while (!con.queue.empty()) {
    TaskRef task = con.queue.front();
    con.queue.pop_front();
    auto it = requests_.find(task.request);
    if (it == requests_.end()) continue;
    Request& req = it->second;
    if (req.rejected) {
      --req.outstanding;
      settle(req);
      continue;
    }
    const double exec_ms = execution_time(app_->et_ms(task.ms), con.effective_vcpu);
    RunningTask run{task, clock_, clock_ + exec_ms / 1000.0};
    TaskRecord& rec = req.tasks[task.ms];
    rec.container = con.id;
    rec.start = clock_;
    rec.exec_ms = exec_ms;
    con.running = run;
    push_event(run.finish, EventKind::TaskFinish, con.id);
    return;
  }
}

void CloudState::on_task_finish(ContainerId id) {
  auto cit = containers_.find(id);
  if (cit == containers_.end() || !cit->second.running) throw SimulationError("finish without a running task");
  Container& con = cit->second;
  const RunningTask run = *con.running;
  con.running.reset();
  con.window.busy_s += clock_ - std::max(run.start, window_start_);
  ++con.window.served;
  con.window.sojourn_ms_sum += (clock_ - run.task.eligible_at) * 1000.0;

  auto rit = requests_.find(run.task.request);
  if (rit != requests_.end()) {
    Request& req = rit->second;
    --req.outstanding;
    if (req.rejected) {
      settle(req);
    } else {
      TaskRecord& rec = req.tasks[run.task.ms];
      rec.finish = clock_;
      rec.done = true;
      for (int succ : app_->successors(run.task.ms)) {
        if (--req.remaining_preds[succ] == 0 && !req.rejected) make_eligible(req, succ, clock_);
      }
      if (app_->successors(run.task.ms).empty() && --req.sinks_left == 0) {
        responses_ms_.push_back((clock_ - req.arrival) * 1000.0);
        ++counters_.completed;
        requests_.erase(rit);
      } else {
        settle(req);
      }
    }
  }
  if (con.retired) {
    if (con.queue.empty()) erase_container(id);
  } else {
    try_start(con);
  }
}

void CloudState::erase_container(ContainerId id) {
  auto it = containers_.find(id);
  if (it == containers_.end()) return;
  const VmId vm_id = it->second.vm;
  containers_.erase(it);
  mark_vm_occupancy(vm_id);
}

void CloudState::mark_vm_occupancy(VmId vm_id) {
  auto it = vms_.find(vm_id);
  if (it == vms_.end()) return;
  bool occupied = false;
  for (const auto& [cid, con] : containers_) {
    if (con.vm == vm_id) {
      occupied = true;
      break;
    }
  }
  if (occupied) {
    it->second.empty_since.reset();
  } else if (!it->second.empty_since) {
    it->second.empty_since = clock_;
  }
}

std::vector<double> cwrr_weights(std::span<const int> vcpus) {
  if (vcpus.empty()) throw ConfigError("cwrr_weights: no containers");
  double total = 0.0;
  for (int v : vcpus) {
    if (v < 1) throw DomainError("cwrr_weights: vCPU allocation must be >= 1");
    total += v;
  }
  std::vector<double> weights;
  weights.reserve(vcpus.size());
  for (int v : vcpus) weights.push_back(static_cast<double>(v) / total);
  return weights;
}

std::size_t smooth_wrr_pick(std::span<const std::int64_t> weights, std::span<std::int64_t> current) {
  std::int64_t total = 0;
  std::size_t best = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    current[k] += weights[k];
    total += weights[k];
    if (current[k] > current[best]) best = k;
  }
  current[best] -= total;
  return best;
}

CloudState init_scenario(std::shared_ptr<const AppSpec> app, const ScenarioConfig& config) {
  CloudState state(std::move(app), config);
  const VmType& type = find_vm_type(config.vm_catalog, config.initial_vm_type);
  if (config.initial_vm_count < 1) throw ConfigError("need at least one initial VM");
  std::vector<VmId> vms;
  for (int k = 0; k < config.initial_vm_count; ++k) {
    std::optional<PmId> host;
    int best_left = 0;
    for (const auto& [pid, pm] : state.pms()) {
      int left = pm.cpu - state.pm_used_cpu(pid);
      double mem_left = pm.mem_gib - state.pm_used_mem(pid);
      if (left < type.vcpu || mem_left < type.mem_gib) continue;
      if (!host || left < best_left) {
        host = pid;
        best_left = left;
      }
    }
    if (!host) throw ConfigError("initial VMs do not fit on the PM pool");
    vms.push_back(state.rent_vm(type, *host));
  }
  const int n = state.app().size();
  std::vector<int> per_vm(vms.size(), 0);
  for (int ms = 0; ms < n; ++ms) ++per_vm[ms % vms.size()];
  for (std::size_t k = 0; k < vms.size(); ++k) {
    if (per_vm[k] > type.vcpu) {
      throw ConfigError("initial containers exceed VM capacity: " + std::to_string(per_vm[k]) + " on a " +
                        std::to_string(type.vcpu) + "-vCPU VM");
    }
  }
  for (int ms = 0; ms < n; ++ms) state.create_container(ms, 1, vms[ms % vms.size()], true);
  return state;
}

std::string to_string(OpKind kind) {
  switch (kind) {
    case OpKind::NoOp: return "noop";
    case OpKind::Vertical: return "vertical";
    case OpKind::Horizontal: return "horizontal";
    case OpKind::Mixed: return "mixed";
    case OpKind::Delete: return "delete";
  }
  return "unknown";
}

OpKind classify_step(std::span<const ExecutedOps> ops) {
  bool vertical = false;
  bool horizontal = false;
  bool only_deletes = true;
  for (const auto& op : ops) {
    switch (op.kind) {
      case OpKind::NoOp:
        break;
      case OpKind::Vertical:
        vertical = true;
        break;
      case OpKind::Mixed:
        vertical = horizontal = true;
        only_deletes = false;
        break;
      case OpKind::Horizontal:
        horizontal = true;
        only_deletes = false;
        break;
      case OpKind::Delete:
        horizontal = true;
        break;
    }
  }
  if (vertical && horizontal) return OpKind::Mixed;
  if (vertical) return OpKind::Vertical;
  if (horizontal) return only_deletes ? OpKind::Delete : OpKind::Horizontal;
  return OpKind::NoOp;
}

StepMetrics run_step(CloudState& state, int step, std::span<const double> arrivals,
                     std::span<const ExecutedOps> ops) {
  const Counters before = state.counters();
  const std::size_t responses_before = state.responses_ms().size();
  for (double t : arrivals) state.schedule_arrival(t);
  state.advance(state.clock() + state.config().decision_interval_s);
  state.roll_window();

  StepMetrics m;
  m.step = step;
  const Counters& after = state.counters();
  m.admitted = after.admitted - before.admitted;
  m.completed = after.completed - before.completed;
  m.rejected = after.rejected - before.rejected;
  m.in_flight = state.in_flight();
  const auto& log = state.responses_ms();
  if (log.size() > responses_before) {
    double sum = std::accumulate(log.begin() + static_cast<std::ptrdiff_t>(responses_before), log.end(), 0.0);
    m.step_art_ms = sum / static_cast<double>(log.size() - responses_before);
  }
  m.cumulative_cost = state.total_cost();
  m.kind = classify_step(ops);
  for (const auto& op : ops) {
    if (op.invalid) m.invalid_action = true;
    if (op.placement_failed) ++m.placement_failures;
    if (op.kind == OpKind::Vertical || op.kind == OpKind::Mixed) ++m.vertical_ops;
    if (op.kind == OpKind::Horizontal || op.kind == OpKind::Mixed || op.kind == OpKind::Delete) ++m.horizontal_ops;
  }
  m.noop_steps = m.kind == OpKind::NoOp ? 1 : 0;
  m.live_containers = static_cast<int>(state.container_list().size());
  m.live_vms = static_cast<int>(state.vms().size());
  return m;
}

StepMetrics env_step(CloudState& state, int step, const ScalingAction& action, std::span<const double> arrivals) {
  release_idle_vms(state);
  ExecutedOps ops = execute_action(state, action);
  StepMetrics m = run_step(state, step, arrivals, std::span<const ExecutedOps>(&ops, 1));
  m.action_ind = action.ind;
  m.action_scale = action.scale;
  return m;
}

}  // namespace gscale
