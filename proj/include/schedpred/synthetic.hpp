#pragma once

// Seeded synthetic trace generator. Tasks of a job run in submission order;
// a task's failure probability is raised when an earlier task of the same job
// failed or was killed, and low-priority tasks are exposed to eviction.

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "schedpred/trace_io.hpp"

namespace schedpred {

struct TasksPerJob {
  enum class Kind { Constant, Uniform };
  Kind kind = Kind::Constant;
  std::uint64_t min = 1;  // also the constant value
  std::uint64_t max = 1;
};

struct SyntheticConfig {
  std::uint64_t n_jobs = 100;
  TasksPerJob tasks_per_job;
  double base_fail_prob = 0.05;
  double history_fail_boost = 0.9;
  double low_priority_evict_prob = 0.3;
  int priority_threshold = 2;
  std::uint64_t seed = 1;

  // Generator shape parameters.
  double kill_fraction = 0.3;       // share of failures emitted as Kill
  double resubmit_prob = 0.0;       // evicted task is resubmitted
  double unscheduled_prob = 0.0;    // task never leaves the queue
  double low_priority_share = 0.25; // jobs drawn with priority below threshold
  double job_interarrival_s = 20.0;
  double wait_log_mu = 2.0;         // ln seconds
  double wait_log_sigma = 1.5;
  double service_log_mu = 5.5;
  double service_log_sigma = 1.2;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

nlohmann::json to_json(const SyntheticConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
SyntheticConfig synthetic_config_from_json(const nlohmann::json& j);

struct SyntheticTrace {
  std::vector<TaskEvent> task_events;  // time-ordered
  std::vector<JobEvent> job_events;    // time-ordered
  std::vector<UsageRecord> usage;
};

SyntheticTrace generate_synthetic_trace(const SyntheticConfig& config);

}  // namespace schedpred
