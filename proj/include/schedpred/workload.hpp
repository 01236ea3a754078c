#pragma once

// Simulation workloads: tasks with scripted per-attempt outcomes.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace schedpred {

enum class PlannedOutcome { Finish, Fail, Evict, Kill };

std::string_view to_string(PlannedOutcome outcome);

/// Intrinsic outcome of one attempt. Non-finish outcomes end the attempt after
/// `fraction` of the planned service time.
struct AttemptPlan {
  PlannedOutcome outcome = PlannedOutcome::Finish;
  double fraction = 1.0;

  bool operator==(const AttemptPlan&) const = default;
};

struct SimTask {
  std::uint64_t job_id = 0;
  std::uint64_t task_index = 0;
  int priority = 0;
  int scheduling_class = 0;
  double cpu = 0.0;
  double ram = 0.0;
  double disk = 0.0;
  std::int64_t arrival = 0;       // microseconds
  std::int64_t service_time = 1;  // microseconds
  /// Attempt k follows plan[min(k, plan.size() - 1)].
  std::vector<AttemptPlan> plan{AttemptPlan{}};

  bool operator==(const SimTask&) const = default;
};

enum class WorkloadKind { Single, Batch, Mix, Custom };

std::string_view to_string(WorkloadKind kind);
WorkloadKind workload_kind_from_string(std::string_view name);

struct Workload {
  WorkloadKind kind = WorkloadKind::Custom;
  /// Grouped by job; task_index ascending within a job.
  std::vector<SimTask> tasks;

  std::size_t n_jobs() const;
  bool operator==(const Workload&) const = default;
};

/// Throws ConfigError on an empty workload, a single-kind workload with a
/// multi-task job, duplicate identities, non-positive service, negative
/// requests or an empty plan.
void validate(const Workload& workload);

nlohmann::json to_json(const Workload& workload);
Workload workload_from_json(const nlohmann::json& j);

/// Knobs of the built-in generators.
struct WorkloadGenParams {
  double fail_prob = 0.15;
  double kill_prob = 0.02;
  double evict_prob = 0.20;       // low-priority tasks only
  double low_priority_share = 0.7;
  int priority_threshold = 2;
  double job_interarrival_s = 30.0;
  double task_gap_s = 45.0;       // mean spacing of task arrivals inside a job
  double service_log_mu = 5.0;    // log-seconds
  double service_log_sigma = 0.5;
  std::size_t max_plan_attempts = 3;

  bool operator==(const WorkloadGenParams&) const = default;
};

nlohmann::json to_json(const WorkloadGenParams& p);
WorkloadGenParams workload_gen_params_from_json(const nlohmann::json& j);

/// single: 100 jobs of 1 task; batch: 800 tasks in 110 jobs; mix: 600 tasks
/// in 400 jobs (300 single-task jobs plus 100 three-task jobs).
Workload builtin_workload(WorkloadKind kind, std::uint64_t seed,
                          const WorkloadGenParams& params = {});

/// Every task finishes on its first attempt.
Workload with_all_finish(Workload workload);

}  // namespace schedpred
