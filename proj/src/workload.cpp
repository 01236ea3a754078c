#include "schedpred/workload.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "schedpred/errors.hpp"
#include "schedpred/rng.hpp"

namespace schedpred {

std::string_view to_string(PlannedOutcome outcome) {
  switch (outcome) {
    case PlannedOutcome::Finish: return "finish";
    case PlannedOutcome::Fail: return "fail";
    case PlannedOutcome::Evict: return "evict";
    case PlannedOutcome::Kill: return "kill";
  }
  return "finish";
}

namespace {

PlannedOutcome planned_outcome_from_string(std::string_view s) {
  for (auto o : {PlannedOutcome::Finish, PlannedOutcome::Fail, PlannedOutcome::Evict,
                 PlannedOutcome::Kill}) {
    if (to_string(o) == s) return o;
  }
  throw ConfigError("unknown planned outcome: " + std::string(s));
}

}  // namespace

std::string_view to_string(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::Single: return "single";
    case WorkloadKind::Batch: return "batch";
    case WorkloadKind::Mix: return "mix";
    case WorkloadKind::Custom: return "custom";
  }
  return "custom";
}

WorkloadKind workload_kind_from_string(std::string_view name) {
  for (auto k : {WorkloadKind::Single, WorkloadKind::Batch, WorkloadKind::Mix, WorkloadKind::Custom}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown workload kind: " + std::string(name));
}

std::size_t Workload::n_jobs() const {
  std::set<std::uint64_t> jobs;
  for (const SimTask& t : tasks) jobs.insert(t.job_id);
  return jobs.size();
}

void validate(const Workload& w) {
  if (w.tasks.empty()) throw ConfigError("workload has no tasks");
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  std::set<std::uint64_t> jobs;
  for (const SimTask& t : w.tasks) {
    if (!seen.emplace(t.job_id, t.task_index).second) {
      throw ConfigError("duplicate task " + std::to_string(t.job_id) + "/" +
                        std::to_string(t.task_index));
    }
    if (w.kind == WorkloadKind::Single && !jobs.insert(t.job_id).second) {
      throw ConfigError("single workload job " + std::to_string(t.job_id) + " has several tasks");
    }
    if (t.service_time <= 0) throw ConfigError("task service time must be positive");
    if (t.arrival < 0) throw ConfigError("task arrival must be non-negative");
    if (t.cpu < 0.0 || t.ram < 0.0 || t.disk < 0.0) throw ConfigError("negative resource request");
    if (t.plan.empty()) throw ConfigError("task has an empty failure plan");
    for (const AttemptPlan& p : t.plan) {
      if (!(p.fraction > 0.0 && p.fraction <= 1.0)) {
        throw ConfigError("attempt fraction must be in (0, 1]");
      }
    }
  }
}

nlohmann::json to_json(const Workload& w) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const SimTask& t : w.tasks) {
    nlohmann::json plan = nlohmann::json::array();
    for (const AttemptPlan& p : t.plan) {
      plan.push_back({{"outcome", to_string(p.outcome)}, {"fraction", p.fraction}});
    }
    tasks.push_back({{"job_id", t.job_id},
                     {"task_index", t.task_index},
                     {"priority", t.priority},
                     {"scheduling_class", t.scheduling_class},
                     {"cpu", t.cpu},
                     {"ram", t.ram},
                     {"disk", t.disk},
                     {"arrival", t.arrival},
                     {"service_time", t.service_time},
                     {"plan", plan}});
  }
  return {{"kind", to_string(w.kind)}, {"tasks", tasks}};
}

Workload workload_from_json(const nlohmann::json& j) {
  Workload w;
  w.kind = workload_kind_from_string(j.at("kind").get<std::string>());
  for (const auto& jt : j.at("tasks")) {
    SimTask t;
    t.job_id = jt.at("job_id").get<std::uint64_t>();
    t.task_index = jt.at("task_index").get<std::uint64_t>();
    t.priority = jt.at("priority").get<int>();
    t.scheduling_class = jt.at("scheduling_class").get<int>();
    t.cpu = jt.at("cpu").get<double>();
    t.ram = jt.at("ram").get<double>();
    t.disk = jt.at("disk").get<double>();
    t.arrival = jt.at("arrival").get<std::int64_t>();
    t.service_time = jt.at("service_time").get<std::int64_t>();
    t.plan.clear();
    for (const auto& p : jt.at("plan")) {
      t.plan.push_back({planned_outcome_from_string(p.at("outcome").get<std::string>()),
                        p.at("fraction").get<double>()});
    }
    w.tasks.push_back(std::move(t));
  }
  validate(w);
  return w;
}

nlohmann::json to_json(const WorkloadGenParams& p) {
  return {{"fail_prob", p.fail_prob},
          {"kill_prob", p.kill_prob},
          {"evict_prob", p.evict_prob},
          {"low_priority_share", p.low_priority_share},
          {"priority_threshold", p.priority_threshold},
          {"job_interarrival_s", p.job_interarrival_s},
          {"task_gap_s", p.task_gap_s},
          {"service_log_mu", p.service_log_mu},
          {"service_log_sigma", p.service_log_sigma},
          {"max_plan_attempts", p.max_plan_attempts}};
}

WorkloadGenParams workload_gen_params_from_json(const nlohmann::json& j) {
  WorkloadGenParams p;
  for (const auto& [key, value] : j.items()) {
    if (key == "fail_prob") p.fail_prob = value.get<double>();
    else if (key == "kill_prob") p.kill_prob = value.get<double>();
    else if (key == "evict_prob") p.evict_prob = value.get<double>();
    else if (key == "low_priority_share") p.low_priority_share = value.get<double>();
    else if (key == "priority_threshold") p.priority_threshold = value.get<int>();
    else if (key == "job_interarrival_s") p.job_interarrival_s = value.get<double>();
    else if (key == "task_gap_s") p.task_gap_s = value.get<double>();
    else if (key == "service_log_mu") p.service_log_mu = value.get<double>();
    else if (key == "service_log_sigma") p.service_log_sigma = value.get<double>();
    else if (key == "max_plan_attempts") p.max_plan_attempts = value.get<std::size_t>();
    else throw ConfigError("unknown workload parameter: " + key);
  }
  for (double prob : {p.fail_prob, p.kill_prob, p.evict_prob, p.low_priority_share}) {
    if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError("workload probabilities must be in [0, 1]");
  }
  if (p.fail_prob + p.kill_prob + p.evict_prob > 1.0) {
    throw ConfigError("fail_prob + kill_prob + evict_prob exceeds 1");
  }
  if (p.max_plan_attempts == 0) throw ConfigError("max_plan_attempts must be positive");
  return p;
}

namespace {

constexpr double kMicros = 1e6;

std::vector<std::size_t> job_sizes(WorkloadKind kind, Rng& rng) {
  switch (kind) {
    case WorkloadKind::Single: return std::vector<std::size_t>(100, 1);
    case WorkloadKind::Mix: {
      std::vector<std::size_t> sizes(300, 1);
      sizes.insert(sizes.end(), 100, 3);
      rng.shuffle(std::span<std::size_t>(sizes));
      return sizes;
    }
    case WorkloadKind::Batch: {
      std::vector<std::size_t> sizes(110, 1);
      for (std::size_t extra = 0; extra < 800 - 110; ++extra) ++sizes[rng.below(sizes.size())];
      return sizes;
    }
    case WorkloadKind::Custom: break;
  }
  throw ConfigError("no built-in generator for a custom workload");
}

AttemptPlan draw_attempt(Rng& rng, const WorkloadGenParams& p, bool low_priority) {
  const double u = rng.uniform();
  const double fraction = rng.uniform(0.1, 0.9);
  if (u < p.kill_prob) return {PlannedOutcome::Kill, fraction};
  if (u < p.kill_prob + p.fail_prob) return {PlannedOutcome::Fail, fraction};
  if (low_priority && u < p.kill_prob + p.fail_prob + p.evict_prob) {
    return {PlannedOutcome::Evict, fraction};
  }
  return {PlannedOutcome::Finish, 1.0};
}

}  // namespace

Workload builtin_workload(WorkloadKind kind, std::uint64_t seed, const WorkloadGenParams& params) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(kind)));
  Workload w;
  w.kind = kind;
  const auto sizes = job_sizes(kind, rng);

  double job_clock = 0.0;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    job_clock += rng.exponential(params.job_interarrival_s);
    const bool low_priority = rng.bernoulli(params.low_priority_share);
    const int priority = low_priority ? static_cast<int>(rng.range(0, params.priority_threshold - 1))
                                      : static_cast<int>(rng.range(params.priority_threshold, 11));
    const auto scheduling_class = static_cast<int>(rng.range(0, 3));
    double task_clock = job_clock;
    for (std::size_t k = 0; k < sizes[j]; ++k) {
      if (k > 0) task_clock += rng.exponential(params.task_gap_s);
      SimTask t;
      t.job_id = 1000 + j;
      t.task_index = k;
      t.priority = priority;
      t.scheduling_class = scheduling_class;
      t.cpu = static_cast<double>(rng.range(4, 32)) / 128.0;
      t.ram = static_cast<double>(rng.range(4, 64)) / 256.0;
      t.disk = static_cast<double>(rng.range(1, 64)) / 4096.0;
      t.arrival = static_cast<std::int64_t>(std::llround(task_clock * kMicros));
      t.service_time = std::max<std::int64_t>(
          1, std::llround(rng.lognormal(params.service_log_mu, params.service_log_sigma) * kMicros));
      t.plan.clear();
      for (std::size_t a = 0; a < params.max_plan_attempts; ++a) {
        t.plan.push_back(draw_attempt(rng, params, priority < params.priority_threshold));
      }
      w.tasks.push_back(std::move(t));
    }
  }
  validate(w);
  return w;
}

Workload with_all_finish(Workload workload) {
  for (SimTask& t : workload.tasks) t.plan = {AttemptPlan{}};
  return workload;
}

}  // namespace schedpred
