#include "schedpred/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>

#include "schedpred/errors.hpp"
#include "schedpred/rng.hpp"

namespace schedpred {

std::vector<Machine> make_machines(std::size_t count, double capacity) {
  std::vector<Machine> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].id = i;
    out[i].cpu_capacity = out[i].ram_capacity = out[i].disk_capacity = capacity;
  }
  return out;
}

std::string_view to_string(PolicyKind kind) {
  return kind == PolicyKind::Baseline ? "baseline" : "predictive";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  if (name == "baseline") return PolicyKind::Baseline;
  if (name == "predictive") return PolicyKind::Predictive;
  throw ConfigError("unknown policy: " + std::string(name));
}

FeatureSchema simulator_schema() {
  return {{"priority", "scheduling_class", "requested_cpu", "requested_ram", "requested_disk",
           "prev_finished", "prev_killed", "prev_failed", "prev_evicted"}};
}

nlohmann::json to_json(const SimConfig& c) {
  return {{"max_attempts", c.max_attempts},
          {"reenqueue_cap", c.reenqueue_cap},
          {"dependency_failures", c.dependency_failures},
          {"dependency_priority_threshold", c.dependency_priority_threshold},
          {"dependency_fail_fraction", c.dependency_fail_fraction},
          {"contention_eviction", c.contention_eviction},
          {"check_invariants", c.check_invariants},
          {"min_training_records", c.min_training_records},
          {"schema", to_json(c.schema)},
          {"retrain_spec", to_json(c.retrain_spec)}};
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
  SimConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "max_attempts") c.max_attempts = value.get<std::size_t>();
    else if (key == "reenqueue_cap") c.reenqueue_cap = value.get<std::size_t>();
    else if (key == "dependency_failures") c.dependency_failures = value.get<bool>();
    else if (key == "dependency_priority_threshold") c.dependency_priority_threshold = value.get<int>();
    else if (key == "dependency_fail_fraction") c.dependency_fail_fraction = value.get<double>();
    else if (key == "contention_eviction") c.contention_eviction = value.get<bool>();
    else if (key == "check_invariants") c.check_invariants = value.get<bool>();
    else if (key == "min_training_records") c.min_training_records = value.get<std::size_t>();
    else if (key == "schema") c.schema = feature_schema_from_json(value);
    else if (key == "retrain_spec") c.retrain_spec = model_spec_from_json(value);
    else throw ConfigError("unknown simulation parameter: " + key);
  }
  if (c.max_attempts == 0) throw ConfigError("max_attempts must be positive");
  if (!(c.dependency_fail_fraction > 0.0 && c.dependency_fail_fraction <= 1.0)) {
    throw ConfigError("dependency_fail_fraction must be in (0, 1]");
  }
  return c;
}

namespace {

constexpr double kEps = 1e-9;

enum class EventKind : int { Completion = 0, Arrival = 1, Retrain = 2 };

struct Event {
  std::int64_t time;
  EventKind kind;
  std::uint64_t seq;
  std::size_t task;
  std::size_t attempt;

  bool operator>(const Event& o) const {
    return std::tie(time, kind, seq) > std::tie(o.time, o.kind, o.seq);
  }
};

struct QueueKey {
  int neg_priority;
  std::int64_t arrival;
  std::uint64_t job_id;
  std::uint64_t task_index;
  std::size_t task;

  auto operator<=>(const QueueKey&) const = default;
};

struct TaskState {
  std::size_t attempts = 0;
  std::size_t reenqueues = 0;
  bool starved = false;
  std::optional<FinalStatus> latest;
  std::optional<FinalStatus> final;
  std::int64_t first_dispatch = -1;
  std::int64_t end_time = 0;
  std::int64_t execution_time = 0;

  bool running = false;
  std::size_t machine = 0;
  std::int64_t start = 0;
  FinalStatus outcome = FinalStatus::Finished;
  std::vector<double> features;

  // Inputs of the last fail prediction; identical inputs are not re-evaluated.
  std::size_t predicted_with = 0;
  std::vector<double> predicted_on;
};

FinalStatus status_of(PlannedOutcome o) {
  switch (o) {
    case PlannedOutcome::Finish: return FinalStatus::Finished;
    case PlannedOutcome::Fail: return FinalStatus::Failed;
    case PlannedOutcome::Evict: return FinalStatus::Evicted;
    case PlannedOutcome::Kill: return FinalStatus::Killed;
  }
  return FinalStatus::Finished;
}

void invariant(bool ok, const char* what) {
  if (!ok) throw std::logic_error(std::string("simulation invariant violated: ") + what);
}

class Simulator {
 public:
  Simulator(const Workload& workload, std::vector<Machine> machines, const SchedulerPolicy& policy,
            std::uint64_t seed, const SimConfig& config)
      : tasks_(workload.tasks),
        machines_(std::move(machines)),
        policy_(policy),
        seed_(seed),
        config_(config),
        state_(workload.tasks.size()),
        model_(policy.model),
        training_(config.schema) {
    std::map<std::uint64_t, std::vector<std::size_t>> jobs;
    for (std::size_t i = 0; i < tasks_.size(); ++i) jobs[tasks_[i].job_id].push_back(i);
    earlier_.resize(tasks_.size());
    for (auto& [job, members] : jobs) {
      std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return tasks_[a].task_index < tasks_[b].task_index;
      });
      for (std::size_t k = 0; k < members.size(); ++k) {
        earlier_[members[k]].assign(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(k));
      }
    }
    n_jobs_ = jobs.size();
  }

  SimResult run() {
    for (std::size_t i = 0; i < tasks_.size(); ++i) push(tasks_[i].arrival, EventKind::Arrival, i, 0);
    const bool predictive = policy_.kind == PolicyKind::Predictive;
    if (predictive) schedule_retrain(0);

    std::int64_t clock = 0;
    while (!events_.empty()) {
      const std::int64_t now = events_.top().time;
      if (config_.check_invariants) invariant(now >= clock, "clock moved backwards");
      clock = now;
      while (!events_.empty() && events_.top().time == now) {
        const Event e = events_.top();
        events_.pop();
        switch (e.kind) {
          case EventKind::Arrival: arrive(e.task, now); break;
          case EventKind::Completion: complete(e.task, e.attempt, now, std::nullopt); break;
          case EventKind::Retrain:
            retrain_pending_ = false;
            retrain();
            break;
        }
      }
      dispatch_pass(now);
      if (predictive && !retrain_pending_ && work_remains()) schedule_retrain(now);
    }
    if (!queue_.empty()) throw std::logic_error("simulation stalled with queued tasks");
    return result();
  }

 private:
  void push(std::int64_t time, EventKind kind, std::size_t task, std::size_t attempt) {
    events_.push({time, kind, seq_++, task, attempt});
  }

  void schedule_retrain(std::int64_t now) {
    const std::int64_t interval = policy_.retrain_interval;
    push((now / interval + 1) * interval, EventKind::Retrain, 0, 0);
    retrain_pending_ = true;
  }

  bool work_remains() const { return !queue_.empty() || running_ > 0 || arrivals_left_ > 0; }

  QueueKey key(std::size_t i) const {
    const SimTask& t = tasks_[i];
    return {-t.priority, t.arrival, t.job_id, t.task_index, i};
  }

  bool fits_total(const SimTask& t, const Machine& m) const {
    return t.cpu <= m.cpu_capacity + kEps && t.ram <= m.ram_capacity + kEps &&
           t.disk <= m.disk_capacity + kEps;
  }

  bool fits_now(const SimTask& t, const Machine& m) const {
    return m.cpu + t.cpu <= m.cpu_capacity + kEps && m.ram + t.ram <= m.ram_capacity + kEps &&
           m.disk + t.disk <= m.disk_capacity + kEps;
  }

  void arrive(std::size_t i, std::int64_t now) {
    --arrivals_left_;
    const SimTask& t = tasks_[i];
    const bool feasible = std::any_of(machines_.begin(), machines_.end(),
                                      [&](const Machine& m) { return fits_total(t, m); });
    if (!feasible) {
      ++infeasible_;
      finalize(i, FinalStatus::Unscheduled, now);
      return;
    }
    queue_.insert(key(i));
  }

  TaskAttributes live(std::size_t i) const {
    const SimTask& t = tasks_[i];
    const TaskState& s = state_[i];
    TaskAttributes a;
    a.job_id = t.job_id;
    a.task_index = t.task_index;
    a.scheduling_class = t.scheduling_class;
    a.priority = t.priority;
    a.requested_cpu = t.cpu;
    a.requested_ram = t.ram;
    a.requested_disk = t.disk;
    a.reschedule_count = s.attempts + s.reenqueues;
    PriorCounts prior;
    for (std::size_t j : earlier_[i]) {
      const TaskState& e = state_[j];
      if (e.latest) prior.add(*e.latest);
      else if (e.final) prior.add(*e.final);
    }
    a.prev_finished = prior.finished;
    a.prev_killed = prior.killed;
    a.prev_failed = prior.failed;
    a.prev_evicted = prior.evicted;
    a.prev_lost = prior.lost;
    a.prev_unscheduled = prior.unscheduled;
    return a;
  }

  bool doomed_by_dependency(const TaskAttributes& a) const {
    if (!config_.dependency_failures) return false;
    if (a.prev_killed > 0) return true;
    return a.priority < config_.dependency_priority_threshold &&
           (a.prev_evicted > 0 || a.prev_failed > 0);
  }

  /// Machine index and whether lower-priority work must be preempted first.
  std::optional<std::pair<std::size_t, bool>> place(std::size_t i) const {
    const SimTask& t = tasks_[i];
    for (std::size_t m = 0; m < machines_.size(); ++m) {
      if (fits_now(t, machines_[m])) return std::pair{m, false};
    }
    if (!config_.contention_eviction) return std::nullopt;
    for (std::size_t m = 0; m < machines_.size(); ++m) {
      Machine freed = machines_[m];
      for (std::size_t r : on_machine_[m]) {
        if (tasks_[r].priority < t.priority) {
          freed.cpu -= tasks_[r].cpu;
          freed.ram -= tasks_[r].ram;
          freed.disk -= tasks_[r].disk;
        }
      }
      if (fits_now(t, freed)) return std::pair{m, true};
    }
    return std::nullopt;
  }

  void preempt(std::size_t i, std::size_t m, std::int64_t now) {
    std::vector<std::size_t> victims;
    for (std::size_t r : on_machine_[m]) {
      if (tasks_[r].priority < tasks_[i].priority) victims.push_back(r);
    }
    std::sort(victims.begin(), victims.end(), [&](std::size_t a, std::size_t b) {
      return std::tuple(tasks_[a].priority, -state_[a].start, a) <
             std::tuple(tasks_[b].priority, -state_[b].start, b);
    });
    for (std::size_t v : victims) {
      if (fits_now(tasks_[i], machines_[m])) break;
      complete(v, state_[v].attempts, now, FinalStatus::Evicted);
    }
  }

  void dispatch_pass(std::int64_t now) {
    const bool gated = policy_.kind == PolicyKind::Predictive && model_ != nullptr;
    std::vector<double> x;
    for (auto it = queue_.begin(); it != queue_.end();) {
      const std::size_t i = it->task;
      const auto slot = place(i);
      if (!slot) {
        ++it;
        continue;
      }
      bool predicted_fail = false;
      if (gated) {
        x.resize(model_->schema().size());
        task_features(live(i), model_->schema(), x);
        TaskState& s = state_[i];
        if (s.predicted_with == model_version_ && s.predicted_on == x) {
          ++it;
          continue;
        }
        predicted_fail = model_->predict(x) == kFailClass;
        if (predicted_fail) {
          if (s.reenqueues < config_.reenqueue_cap) {
            s.predicted_with = model_version_;
            s.predicted_on = x;
            ++s.reenqueues;
            ++reenqueues_;
            ++it;
            continue;
          }
          s.starved = true;
        }
      }
      if (config_.check_invariants) {
        invariant(!predicted_fail || state_[i].starved, "dispatched a task predicted to fail");
      }
      it = queue_.erase(it);
      if (slot->second) preempt(i, slot->first, now);
      start(i, slot->first, now);
    }
  }

  void start(std::size_t i, std::size_t m, std::int64_t now) {
    const SimTask& t = tasks_[i];
    TaskState& s = state_[i];
    Machine& machine = machines_[m];
    machine.cpu += t.cpu;
    machine.ram += t.ram;
    machine.disk += t.disk;
    if (config_.check_invariants) {
      invariant(machine.cpu <= machine.cpu_capacity + kEps &&
                    machine.ram <= machine.ram_capacity + kEps &&
                    machine.disk <= machine.disk_capacity + kEps,
                "machine allocation exceeds capacity");
    }
    on_machine_[m].push_back(i);

    const TaskAttributes a = live(i);
    s.features.resize(config_.schema.size());
    task_features(a, config_.schema, s.features);

    AttemptPlan plan = t.plan[std::min(s.attempts, t.plan.size() - 1)];
    if (doomed_by_dependency(a)) plan = {PlannedOutcome::Fail, config_.dependency_fail_fraction};
    const auto duration = std::max<std::int64_t>(
        1, std::llround(static_cast<double>(t.service_time) * plan.fraction));

    s.running = true;
    s.machine = m;
    s.start = now;
    s.outcome = status_of(plan.outcome);
    if (s.first_dispatch < 0) s.first_dispatch = now;
    ++running_;
    ++dispatches_;
    push(now + duration, EventKind::Completion, i, s.attempts);
  }

  /// Ends the running attempt `attempt` of task i; `forced` overrides the plan.
  void complete(std::size_t i, std::size_t attempt, std::int64_t now,
                std::optional<FinalStatus> forced) {
    TaskState& s = state_[i];
    if (!s.running || s.attempts != attempt) return;  // attempt already preempted
    const SimTask& t = tasks_[i];
    Machine& machine = machines_[s.machine];
    machine.cpu -= t.cpu;
    machine.ram -= t.ram;
    machine.disk -= t.disk;
    auto& slot = on_machine_[s.machine];
    slot.erase(std::find(slot.begin(), slot.end(), i));
    s.running = false;
    --running_;

    const FinalStatus outcome = forced.value_or(s.outcome);
    s.execution_time += now - s.start;
    ++s.attempts;
    s.latest = outcome;
    training_.add(s.features, label_of(outcome));

    const bool retry = (outcome == FinalStatus::Failed || outcome == FinalStatus::Evicted) &&
                       s.attempts < config_.max_attempts;
    if (retry) {
      queue_.insert(key(i));
    } else {
      finalize(i, outcome, now);
    }
  }

  void finalize(std::size_t i, FinalStatus status, std::int64_t now) {
    state_[i].final = status;
    state_[i].end_time = now;
  }

  /// Every retrain tick also re-opens parked predictions, so a queue of
  /// predicted-fail tasks drains through the re-enqueue cap.
  void retrain() {
    ++model_version_;
    if (training_.size() < config_.min_training_records) return;
    ModelSpec spec = config_.retrain_spec;
    ++retrains_;
    if (auto* forest = std::get_if<ForestParams>(&spec)) {
      forest->seed = derive_seed(seed_, retrains_);
      forest->workers = 1;
    }
    model_ = train_model(spec, training_);
  }

  SimResult result() const {
    SimResult r;
    r.policy = std::string(to_string(policy_.kind));
    r.seed = seed_;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      const SimTask& t = tasks_[i];
      const TaskState& s = state_[i];
      if (config_.check_invariants) invariant(s.final.has_value(), "task without a final status");
      r.ledger.push_back({t.job_id, t.task_index, s.final.value_or(FinalStatus::Lost), s.attempts,
                          s.reenqueues, s.starved, t.arrival, s.first_dispatch, s.end_time,
                          s.execution_time});
    }
    std::sort(r.ledger.begin(), r.ledger.end(), [](const LedgerEntry& a, const LedgerEntry& b) {
      return std::tie(a.job_id, a.task_index) < std::tie(b.job_id, b.task_index);
    });
    SimResult out = result_from_ledger(std::move(r.ledger), r.policy, seed_);
    out.dispatches = dispatches_;
    out.reenqueues = reenqueues_;
    out.retrains = retrains_;
    out.infeasible = infeasible_;
    if (config_.check_invariants) {
      std::size_t sum = 0;
      for (std::size_t c : out.task_counts) sum += c;
      invariant(sum == tasks_.size(), "ledger counts do not partition the task set");
      invariant(out.n_jobs == n_jobs_, "job rollup lost a job");
    }
    return out;
  }

  const std::vector<SimTask>& tasks_;
  std::vector<Machine> machines_;
  const SchedulerPolicy& policy_;
  std::uint64_t seed_;
  const SimConfig& config_;

  std::vector<TaskState> state_;
  std::vector<std::vector<std::size_t>> earlier_;
  std::vector<std::vector<std::size_t>> on_machine_ = std::vector<std::vector<std::size_t>>(machines_.size());
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::set<QueueKey> queue_;
  std::shared_ptr<const Model> model_;
  Dataset training_;

  std::uint64_t seq_ = 0;
  std::size_t n_jobs_ = 0;
  std::size_t arrivals_left_ = tasks_.size();
  std::size_t running_ = 0;
  std::size_t dispatches_ = 0;
  std::size_t reenqueues_ = 0;
  std::size_t retrains_ = 0;
  std::size_t infeasible_ = 0;
  std::size_t model_version_ = 1;  // 0 never matches a task's last prediction
  bool retrain_pending_ = false;
};

}  // namespace

SimResult run_simulation(const Workload& workload, std::vector<Machine> machines,
                         const SchedulerPolicy& policy, std::uint64_t seed, const SimConfig& config) {
  if (machines.empty()) throw ConfigError("simulation needs at least one machine");
  if (policy.retrain_interval <= 0) throw ConfigError("retrain interval must be positive");
  validate(workload);
  Simulator sim(workload, std::move(machines), policy, seed, config);
  return sim.run();
}

std::vector<std::pair<std::uint64_t, FinalStatus>> job_rollup(const std::vector<LedgerEntry>& ledger) {
  std::map<std::uint64_t, StatusCounts> jobs;
  for (const LedgerEntry& e : ledger) ++jobs[e.job_id][index_of(e.final_status)];
  std::vector<std::pair<std::uint64_t, FinalStatus>> out;
  out.reserve(jobs.size());
  for (const auto& [job, counts] : jobs) out.emplace_back(job, rollup_job_status(counts));
  return out;
}

SimResult result_from_ledger(std::vector<LedgerEntry> ledger, std::string policy, std::uint64_t seed) {
  SimResult r;
  r.policy = std::move(policy);
  r.seed = seed;
  r.n_tasks = ledger.size();
  std::int64_t first = 0, last = 0;
  bool any = false;
  for (const LedgerEntry& e : ledger) {
    ++r.task_counts[index_of(e.final_status)];
    r.total_execution_time += e.execution_time;
    r.starved += e.starved ? 1 : 0;
    r.reenqueues += e.reenqueues;
    first = any ? std::min(first, e.arrival) : e.arrival;
    last = any ? std::max(last, e.end_time) : e.end_time;
    any = true;
  }
  r.makespan = last - first;
  const auto jobs = job_rollup(ledger);
  r.n_jobs = jobs.size();
  for (const auto& [job, status] : jobs) ++r.job_counts[index_of(status)];
  r.ledger = std::move(ledger);
  return r;
}

nlohmann::json to_json(const SimResult& r) {
  auto counts = [](const StatusCounts& c) {
    nlohmann::json j = nlohmann::json::object();
    for (FinalStatus s : kAllFinalStatuses) j[std::string(to_string(s))] = c[index_of(s)];
    return j;
  };
  return {{"policy", r.policy},
          {"seed", r.seed},
          {"n_tasks", r.n_tasks},
          {"n_jobs", r.n_jobs},
          {"task_counts", counts(r.task_counts)},
          {"job_counts", counts(r.job_counts)},
          {"total_execution_time_us", r.total_execution_time},
          {"makespan_us", r.makespan},
          {"dispatches", r.dispatches},
          {"reenqueues", r.reenqueues},
          {"starved", r.starved},
          {"retrains", r.retrains},
          {"infeasible", r.infeasible}};
}

namespace {

const std::vector<std::string> kLedgerColumns = {
    "job_id",         "task_index", "final_status", "attempts", "reenqueues",
    "starved",        "arrival",    "first_dispatch", "end_time", "execution_time"};

template <typename T>
T parse_field(std::string_view s, std::size_t line, const char* name) {
  T v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw MalformedRow(line, std::string("unparsable ") + name);
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t at = 0;
  while (true) {
    const auto comma = line.find(',', at);
    out.push_back(line.substr(at, comma == std::string_view::npos ? std::string_view::npos : comma - at));
    if (comma == std::string_view::npos) break;
    at = comma + 1;
  }
  return out;
}

}  // namespace

void write_ledger_csv(std::ostream& out, const std::vector<LedgerEntry>& ledger) {
  for (std::size_t c = 0; c < kLedgerColumns.size(); ++c) {
    out << (c ? "," : "") << kLedgerColumns[c];
  }
  out << '\n';
  for (const LedgerEntry& e : ledger) {
    out << e.job_id << ',' << e.task_index << ',' << to_string(e.final_status) << ',' << e.attempts
        << ',' << e.reenqueues << ',' << (e.starved ? 1 : 0) << ',' << e.arrival << ','
        << e.first_dispatch << ',' << e.end_time << ',' << e.execution_time << '\n';
  }
}

std::vector<LedgerEntry> read_ledger_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaMismatch("ledger is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() != kLedgerColumns.size() ||
      !std::equal(header.begin(), header.end(), kLedgerColumns.begin())) {
    throw SchemaMismatch("ledger header does not match");
  }
  std::vector<LedgerEntry> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != kLedgerColumns.size()) throw MalformedRow(line_no, "arity");
    LedgerEntry e;
    e.job_id = parse_field<std::uint64_t>(f[0], line_no, "job_id");
    e.task_index = parse_field<std::uint64_t>(f[1], line_no, "task_index");
    const auto status = final_status_from_string(f[2]);
    if (!status) throw MalformedRow(line_no, "unknown final status");
    e.final_status = *status;
    e.attempts = parse_field<std::size_t>(f[3], line_no, "attempts");
    e.reenqueues = parse_field<std::size_t>(f[4], line_no, "reenqueues");
    e.starved = parse_field<int>(f[5], line_no, "starved") != 0;
    e.arrival = parse_field<std::int64_t>(f[6], line_no, "arrival");
    e.first_dispatch = parse_field<std::int64_t>(f[7], line_no, "first_dispatch");
    e.end_time = parse_field<std::int64_t>(f[8], line_no, "end_time");
    e.execution_time = parse_field<std::int64_t>(f[9], line_no, "execution_time");
    out.push_back(e);
  }
  return out;
}

}  // namespace schedpred
