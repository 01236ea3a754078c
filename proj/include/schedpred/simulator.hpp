#pragma once

// Discrete-event cluster simulator: priority-FIFO dispatch onto first-fit
// machines, optionally gated by a failure predictor retrained on the fly.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "schedpred/lifecycle.hpp"
#include "schedpred/model.hpp"
#include "schedpred/workload.hpp"

namespace schedpred {

struct Machine {
  std::size_t id = 0;
  double cpu_capacity = 1.0;
  double ram_capacity = 1.0;
  double disk_capacity = 1.0;
  double cpu = 0.0;  // allocated
  double ram = 0.0;
  double disk = 0.0;
};

std::vector<Machine> make_machines(std::size_t count, double capacity = 1.0);

enum class PolicyKind { Baseline, Predictive };

std::string_view to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(std::string_view name);

struct SchedulerPolicy {
  PolicyKind kind = PolicyKind::Baseline;
  /// Model used until the first retrain; Predictive without one behaves as
  /// Baseline until then.
  std::shared_ptr<const Model> model;
  std::int64_t retrain_interval = 600'000'000;  // 10 simulated minutes

  static SchedulerPolicy baseline() { return {}; }
  static SchedulerPolicy predictive(std::shared_ptr<const Model> model = nullptr,
                                    std::int64_t retrain_interval = 600'000'000) {
    return {PolicyKind::Predictive, std::move(model), retrain_interval};
  }
};

/// Features observable at dispatch: priority, scheduling class, requested
/// resources and the outcomes of earlier tasks of the job.
FeatureSchema simulator_schema();

struct SimConfig {
  std::size_t max_attempts = 3;
  std::size_t reenqueue_cap = 50;
  /// An attempt fails early when an earlier task of its job was killed, or
  /// when the task has priority below this threshold and an earlier task
  /// failed or was evicted.
  bool dependency_failures = true;
  int dependency_priority_threshold = 2;
  double dependency_fail_fraction = 0.1;
  /// Higher-priority work preempts running lower-priority tasks.
  bool contention_eviction = false;
  /// Resource, dispatch and clock assertions; violations throw std::logic_error.
  bool check_invariants = true;
  std::size_t min_training_records = 20;
  FeatureSchema schema = simulator_schema();
  ModelSpec retrain_spec = ForestParams{};
};

nlohmann::json to_json(const SimConfig& config);
/// Applies the keys present in `j` over the defaults; throws ConfigError.
SimConfig sim_config_from_json(const nlohmann::json& j);

struct LedgerEntry {
  std::uint64_t job_id = 0;
  std::uint64_t task_index = 0;
  FinalStatus final_status = FinalStatus::Unscheduled;
  std::size_t attempts = 0;
  std::size_t reenqueues = 0;
  bool starved = false;
  std::int64_t arrival = 0;
  std::int64_t first_dispatch = -1;  // -1 when never dispatched
  std::int64_t end_time = 0;
  std::int64_t execution_time = 0;  // summed attempt durations

  bool operator==(const LedgerEntry&) const = default;
};

struct SimResult {
  std::string policy;
  std::uint64_t seed = 0;
  std::size_t n_tasks = 0;
  std::size_t n_jobs = 0;
  StatusCounts task_counts{};
  StatusCounts job_counts{};
  std::int64_t total_execution_time = 0;
  std::int64_t makespan = 0;
  std::size_t dispatches = 0;
  std::size_t reenqueues = 0;
  std::size_t starved = 0;
  std::size_t retrains = 0;
  std::size_t infeasible = 0;
  /// Sorted by (job_id, task_index).
  std::vector<LedgerEntry> ledger;

  std::size_t finished_tasks() const { return task_counts[index_of(FinalStatus::Finished)]; }
  std::size_t finished_jobs() const { return job_counts[index_of(FinalStatus::Finished)]; }
};

/// Tasks whose request exceeds every machine's capacity are marked
/// Unscheduled and counted in `infeasible`. Throws ConfigError on an empty
/// machine list, an invalid workload or a non-positive retrain interval.
SimResult run_simulation(const Workload& workload, std::vector<Machine> machines,
                         const SchedulerPolicy& policy, std::uint64_t seed,
                         const SimConfig& config = {});

/// Final status per job id, ascending.
std::vector<std::pair<std::uint64_t, FinalStatus>> job_rollup(const std::vector<LedgerEntry>& ledger);

/// Recomputes the counts and totals of a result from its ledger alone.
SimResult result_from_ledger(std::vector<LedgerEntry> ledger, std::string policy = "",
                             std::uint64_t seed = 0);

/// Summary without the ledger.
nlohmann::json to_json(const SimResult& result);

void write_ledger_csv(std::ostream& out, const std::vector<LedgerEntry>& ledger);
/// Throws SchemaMismatch or MalformedRow.
std::vector<LedgerEntry> read_ledger_csv(std::istream& in);

}  // namespace schedpred
