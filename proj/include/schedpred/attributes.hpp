#pragma once

// Per-task and per-job attribute records reconstructed from trace events, and
// the status distribution / waiting-service summaries computed over them.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "schedpred/lifecycle.hpp"
#include "schedpred/trace_io.hpp"

namespace schedpred {

struct TaskAttributes {
  std::uint64_t job_id = 0;
  std::uint64_t task_index = 0;
  std::int64_t waiting_time = 0;  // microseconds
  std::int64_t service_time = 0;  // microseconds
  int scheduling_class = 0;
  int priority = 0;
  double requested_cpu = 0.0;
  double requested_ram = 0.0;
  double requested_disk = 0.0;
  double used_cpu = 0.0;
  double used_ram = 0.0;
  double used_disk = 0.0;
  std::uint64_t prev_finished = 0;
  std::uint64_t prev_killed = 0;
  std::uint64_t prev_failed = 0;
  std::uint64_t prev_evicted = 0;
  std::uint64_t prev_lost = 0;
  std::uint64_t prev_unscheduled = 0;
  std::uint64_t reschedule_count = 0;
  FinalStatus final_status = FinalStatus::Lost;

  bool operator==(const TaskAttributes&) const = default;
};

struct JobAttributes {
  std::uint64_t job_id = 0;
  std::int64_t waiting_time = 0;
  std::int64_t service_time = 0;
  int scheduling_class = 0;
  std::uint64_t n_finished = 0;
  std::uint64_t n_killed = 0;
  std::uint64_t n_failed = 0;
  std::uint64_t n_evicted = 0;
  std::uint64_t n_lost = 0;
  std::uint64_t n_unscheduled = 0;
  std::uint64_t total_tasks = 0;
  FinalStatus final_status = FinalStatus::Lost;

  bool operator==(const JobAttributes&) const = default;
};

/// Final statuses of the earlier tasks of the same job.
struct PriorCounts {
  std::uint64_t finished = 0;
  std::uint64_t killed = 0;
  std::uint64_t failed = 0;
  std::uint64_t evicted = 0;
  std::uint64_t lost = 0;
  std::uint64_t unscheduled = 0;

  void add(FinalStatus status);
};

/// Attributes of one task from its time-ordered events. Throws MissingSubmit
/// when the history holds no Submit event.
TaskAttributes build_task_attributes(std::span<const TaskEvent> events,
                                     std::span<const UsageRecord> usage, const PriorCounts& prior);

/// Job record from the attributes of all its tasks and its own events.
JobAttributes build_job_attributes(std::span<const TaskAttributes> tasks,
                                   std::span<const JobEvent> job_events);

struct AttributeTables {
  std::vector<TaskAttributes> tasks;  // grouped by job, submission order within job
  std::vector<JobAttributes> jobs;    // ascending job id
  std::size_t skipped_tasks = 0;      // histories starting before the sampled window
};

/// Groups a whole trace by task and job. Within a job, tasks are ordered by
/// first Submit timestamp, ties by first appearance in the input.
AttributeTables build_attribute_tables(std::span<const TaskEvent> task_events,
                                       std::span<const JobEvent> job_events,
                                       std::span<const UsageRecord> usage);

struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Linear-interpolation quantiles (the default of most statistics packages).
FiveNumber five_number_summary(std::vector<double> values);

struct StatusRow {
  FinalStatus status = FinalStatus::Finished;
  std::size_t count = 0;
  double percent = 0.0;
  std::optional<FiveNumber> waiting;  // seconds
  std::optional<FiveNumber> service;  // seconds
};

struct StatusSummary {
  std::size_t total = 0;
  std::array<StatusRow, kNumFinalStatuses> rows;
};

/// Throws EmptyInput on an empty sequence.
StatusSummary summarize(std::span<const TaskAttributes> tasks);
StatusSummary summarize(std::span<const JobAttributes> jobs);
/// Counts-only summary (no time distributions).
StatusSummary summarize_counts(const StatusCounts& counts);

nlohmann::json to_json(const StatusSummary& summary);

/// Attribute tables as CSV with a header row naming every field.
void write_task_attributes_csv(std::ostream& out, std::span<const TaskAttributes> tasks);
void write_job_attributes_csv(std::ostream& out, std::span<const JobAttributes> jobs);
std::vector<TaskAttributes> read_task_attributes_csv(std::istream& in);
std::vector<JobAttributes> read_job_attributes_csv(std::istream& in);

extern const std::vector<std::string> kTaskAttributeColumns;
extern const std::vector<std::string> kJobAttributeColumns;

}  // namespace schedpred
