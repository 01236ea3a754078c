#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "schedpred/compare.hpp"
#include "schedpred/simulator.hpp"
#include "schedpred/workload.hpp"

using namespace schedpred;

namespace {

constexpr std::int64_t kSec = 1'000'000;

SimTask task(std::uint64_t job, std::uint64_t index, std::int64_t arrival, double cpu = 0.25,
             int priority = 5) {
  SimTask t;
  t.job_id = job;
  t.task_index = index;
  t.priority = priority;
  t.cpu = cpu;
  t.ram = 0.1;
  t.disk = 0.01;
  t.arrival = arrival;
  t.service_time = 100 * kSec;
  return t;
}

std::shared_ptr<const Model> constant_model(int label) {
  Dataset d(simulator_schema());
  std::vector<double> row(d.n_features(), 0.0);
  for (int i = 0; i < 10; ++i) {
    row[0] = i;
    d.add(row, label);
  }
  return train_model(TreeParams{}, d);
}

void expect_partition(const SimResult& r) {
  std::size_t sum = 0;
  for (auto c : r.task_counts) sum += c;
  EXPECT_EQ(sum, r.n_tasks);
  EXPECT_EQ(r.ledger.size(), r.n_tasks);
  sum = 0;
  for (auto c : r.job_counts) sum += c;
  EXPECT_EQ(sum, r.n_jobs);
}

LedgerEntry entry(std::uint64_t job, std::uint64_t index, FinalStatus s, std::int64_t exec = 10) {
  LedgerEntry e;
  e.job_id = job;
  e.task_index = index;
  e.final_status = s;
  e.execution_time = exec;
  e.attempts = 1;
  return e;
}

}  // namespace

TEST(BuiltinWorkload, PublishedSizes) {
  const auto single = builtin_workload(WorkloadKind::Single, 1);
  EXPECT_EQ(single.tasks.size(), 100u);
  EXPECT_EQ(single.n_jobs(), 100u);
  const auto batch = builtin_workload(WorkloadKind::Batch, 1);
  EXPECT_EQ(batch.tasks.size(), 800u);
  EXPECT_EQ(batch.n_jobs(), 110u);
  const auto mix = builtin_workload(WorkloadKind::Mix, 1);
  EXPECT_EQ(mix.tasks.size(), 600u);
  EXPECT_EQ(mix.n_jobs(), 400u);
  EXPECT_NO_THROW(validate(batch));
  EXPECT_EQ(builtin_workload(WorkloadKind::Batch, 1), batch);
  EXPECT_NE(builtin_workload(WorkloadKind::Batch, 2), batch);
}

TEST(BuiltinWorkload, JsonRoundTrip) {
  const auto mix = builtin_workload(WorkloadKind::Mix, 3);
  EXPECT_EQ(workload_from_json(nlohmann::json::parse(to_json(mix).dump())), mix);
  WorkloadGenParams p;
  p.fail_prob = 0.3;
  EXPECT_EQ(workload_gen_params_from_json(to_json(p)), p);
  EXPECT_THROW(workload_gen_params_from_json({{"fail_prob", 2.0}}), ConfigError);
}

TEST(Workload, Validation) {
  Workload w;
  EXPECT_THROW(validate(w), ConfigError);
  w.tasks = {task(1, 0, 0), task(1, 0, 0)};
  EXPECT_THROW(validate(w), ConfigError);
  w.tasks = {task(1, 0, 0), task(1, 1, 0)};
  w.kind = WorkloadKind::Single;
  EXPECT_THROW(validate(w), ConfigError);
  w.kind = WorkloadKind::Custom;
  w.tasks[1].service_time = 0;
  EXPECT_THROW(validate(w), ConfigError);
}

TEST(Simulation, AllFinishWorkloadIsPolicyIndependent) {
  for (auto kind : {WorkloadKind::Single, WorkloadKind::Batch, WorkloadKind::Mix}) {
    const auto w = with_all_finish(builtin_workload(kind, 5));
    const auto base = run_simulation(w, make_machines(8), SchedulerPolicy::baseline(), 5);
    const auto pred = run_simulation(w, make_machines(8), SchedulerPolicy::predictive(), 5);
    EXPECT_EQ(base.ledger, pred.ledger);
    EXPECT_EQ(base.task_counts, pred.task_counts);
    EXPECT_EQ(base.finished_tasks(), w.tasks.size());
    EXPECT_EQ(base.total_execution_time, pred.total_execution_time);
  }
}

TEST(Simulation, DeterministicPerPolicy) {
  const auto w = builtin_workload(WorkloadKind::Batch, 2);
  for (const auto& policy : {SchedulerPolicy::baseline(), SchedulerPolicy::predictive()}) {
    const auto a = run_simulation(w, make_machines(8), policy, 9);
    const auto b = run_simulation(w, make_machines(8), policy, 9);
    EXPECT_EQ(a.ledger, b.ledger);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    expect_partition(a);
  }
}

TEST(Simulation, PriorityThenArrivalOrder) {
  // One machine that fits one task at a time.
  Workload w;
  w.tasks = {task(1, 0, 0, 1.0, 1), task(2, 0, 1, 1.0, 1), task(3, 0, 2, 1.0, 9)};
  const auto r = run_simulation(w, make_machines(1), SchedulerPolicy::baseline(), 1);
  std::map<std::uint64_t, std::int64_t> start;
  for (const auto& e : r.ledger) start[e.job_id] = e.first_dispatch;
  EXPECT_EQ(start[1], 0);
  EXPECT_LT(start[3], start[2]);
  EXPECT_EQ(r.makespan, 300 * kSec);
}

TEST(Simulation, FailedAttemptsRetryUpToLimit) {
  Workload w;
  w.tasks = {task(1, 0, 0)};
  w.tasks[0].plan = {{PlannedOutcome::Fail, 0.5}};
  SimConfig c;
  c.dependency_failures = false;
  const auto r = run_simulation(w, make_machines(1), SchedulerPolicy::baseline(), 1, c);
  ASSERT_EQ(r.ledger.size(), 1u);
  EXPECT_EQ(r.ledger[0].attempts, c.max_attempts);
  EXPECT_EQ(r.ledger[0].final_status, FinalStatus::Failed);
  EXPECT_EQ(r.ledger[0].execution_time, static_cast<std::int64_t>(c.max_attempts) * 50 * kSec);
}

TEST(Simulation, KilledPredecessorDoomsLaterTasks) {
  Workload w;
  w.tasks = {task(1, 0, 0), task(1, 1, 200 * kSec)};
  w.tasks[0].plan = {{PlannedOutcome::Kill, 0.5}};
  const auto r = run_simulation(w, make_machines(1), SchedulerPolicy::baseline(), 1);
  EXPECT_EQ(r.ledger[0].final_status, FinalStatus::Killed);
  EXPECT_EQ(r.ledger[1].final_status, FinalStatus::Failed);
  SimConfig c;
  c.dependency_failures = false;
  const auto free = run_simulation(w, make_machines(1), SchedulerPolicy::baseline(), 1, c);
  EXPECT_EQ(free.ledger[1].final_status, FinalStatus::Finished);
}

TEST(Simulation, ReenqueueCapFlagsStarvation) {
  const auto w = builtin_workload(WorkloadKind::Single, 4);
  SimConfig c;
  c.reenqueue_cap = 3;
  c.min_training_records = 1'000'000;  // keep the initial model
  const auto always_fail = constant_model(kFailClass);
  const auto r = run_simulation(w, make_machines(8),
                                SchedulerPolicy::predictive(always_fail, 60 * kSec), 4, c);
  expect_partition(r);
  for (const auto& e : r.ledger) {
    EXPECT_TRUE(e.starved);
    EXPECT_EQ(e.reenqueues, 3u);
    EXPECT_GE(e.attempts, 1u);
  }
  EXPECT_EQ(r.starved, w.tasks.size());
}

TEST(Simulation, FinishPredictionDispatchesImmediately) {
  const auto w = builtin_workload(WorkloadKind::Mix, 4);
  SimConfig c;
  c.min_training_records = 1'000'000;  // never replace the model
  const auto base = run_simulation(w, make_machines(8), SchedulerPolicy::baseline(), 4, c);
  const auto pred = run_simulation(
      w, make_machines(8), SchedulerPolicy::predictive(constant_model(kFinishClass)), 4, c);
  EXPECT_EQ(base.ledger, pred.ledger);
}

TEST(Simulation, InfeasibleTasksAreUnscheduled) {
  Workload w;
  w.tasks = {task(1, 0, 0, 2.0), task(2, 0, 0, 0.5)};
  const auto r = run_simulation(w, make_machines(2), SchedulerPolicy::baseline(), 1);
  EXPECT_EQ(r.infeasible, 1u);
  EXPECT_EQ(r.ledger[0].final_status, FinalStatus::Unscheduled);
  EXPECT_EQ(r.ledger[1].final_status, FinalStatus::Finished);
  EXPECT_THROW(run_simulation(w, {}, SchedulerPolicy::baseline(), 1), ConfigError);
  EXPECT_THROW(run_simulation(w, make_machines(1), SchedulerPolicy::predictive(nullptr, 0), 1),
               ConfigError);
}

TEST(Simulation, ContentionEvictionToggle) {
  // A low-priority task occupies the only machine when a high-priority one arrives.
  Workload w;
  w.tasks = {task(1, 0, 0, 1.0, 0), task(2, 0, 10 * kSec, 1.0, 9)};
  const auto off = run_simulation(w, make_machines(1), SchedulerPolicy::baseline(), 1);
  EXPECT_EQ(off.ledger[1].first_dispatch, 100 * kSec);
  SimConfig c;
  c.contention_eviction = true;
  const auto on = run_simulation(w, make_machines(1), SchedulerPolicy::baseline(), 1, c);
  EXPECT_EQ(on.ledger[1].first_dispatch, 10 * kSec);
  EXPECT_GE(on.ledger[0].attempts, 2u);
  expect_partition(on);
}

TEST(Simulation, BatchRunsUnderPredictivePolicyConserveTasks) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto w = builtin_workload(WorkloadKind::Batch, seed);
    const auto r = run_simulation(w, make_machines(8), SchedulerPolicy::predictive(), seed);
    expect_partition(r);
    EXPECT_GT(r.retrains, 0u);
  }
}

TEST(JobRollup, Examples) {
  const std::vector<LedgerEntry> ledger = {
      entry(1, 0, FinalStatus::Finished), entry(1, 1, FinalStatus::Finished),
      entry(2, 0, FinalStatus::Finished), entry(2, 1, FinalStatus::Killed),
      entry(3, 0, FinalStatus::Unscheduled), entry(3, 1, FinalStatus::Unscheduled)};
  const auto jobs = job_rollup(ledger);
  ASSERT_EQ(jobs.size(), 3u);
  EXPECT_EQ(jobs[0].second, FinalStatus::Finished);
  EXPECT_EQ(jobs[1].second, FinalStatus::Failed);
  EXPECT_EQ(jobs[2].second, FinalStatus::Unscheduled);
}

TEST(Compare, IdenticalLedgersHaveZeroDeltas) {
  const auto w = builtin_workload(WorkloadKind::Batch, 1);
  const auto r = run_simulation(w, make_machines(8), SchedulerPolicy::baseline(), 1);
  const auto imp = compare_results(r, r);
  EXPECT_EQ(imp.flipped_to_success_count, 0u);
  EXPECT_EQ(imp.flipped_to_failure_count, 0u);
  EXPECT_EQ(imp.delta_finished_tasks, 0);
  EXPECT_EQ(imp.delta_finished_jobs, 0);
  EXPECT_EQ(imp.delta_execution_time, 0);
}

TEST(Compare, OneFlipEachWayOfFour) {
  const auto base = result_from_ledger({entry(1, 0, FinalStatus::Finished), entry(2, 0, FinalStatus::Failed),
                                        entry(3, 0, FinalStatus::Finished), entry(4, 0, FinalStatus::Killed)});
  const auto pred = result_from_ledger({entry(1, 0, FinalStatus::Failed), entry(2, 0, FinalStatus::Finished),
                                        entry(3, 0, FinalStatus::Finished), entry(4, 0, FinalStatus::Killed, 30)});
  const auto imp = compare_results(base, pred);
  EXPECT_DOUBLE_EQ(imp.flipped_to_success, 25.0);
  EXPECT_DOUBLE_EQ(imp.flipped_to_failure, 25.0);
  EXPECT_EQ(imp.delta_finished_tasks, 0);
  EXPECT_EQ(imp.delta_execution_time, 20);
  EXPECT_DOUBLE_EQ(*imp.delta_execution_time_pct, 50.0);
}

TEST(Compare, MismatchedLedgers) {
  const auto a = result_from_ledger({entry(1, 0, FinalStatus::Finished)});
  const auto b = result_from_ledger({entry(2, 0, FinalStatus::Finished)});
  const auto c = result_from_ledger({entry(1, 0, FinalStatus::Finished), entry(1, 1, FinalStatus::Finished)});
  EXPECT_THROW(compare_results(a, b), LedgerMismatch);
  EXPECT_THROW(compare_results(a, c), LedgerMismatch);
}

TEST(Ledger, CsvRoundTrip) {
  const auto w = builtin_workload(WorkloadKind::Mix, 6);
  const auto r = run_simulation(w, make_machines(8), SchedulerPolicy::predictive(), 6);
  std::stringstream s;
  write_ledger_csv(s, r.ledger);
  const auto back = read_ledger_csv(s);
  EXPECT_EQ(back, r.ledger);
  const auto again = result_from_ledger(back, r.policy, r.seed);
  EXPECT_EQ(again.task_counts, r.task_counts);
  EXPECT_EQ(again.job_counts, r.job_counts);
  EXPECT_EQ(again.total_execution_time, r.total_execution_time);
  std::istringstream bad("nonsense\n");
  EXPECT_THROW(read_ledger_csv(bad), Error);
}

TEST(SimConfig, JsonRoundTrip) {
  SimConfig c;
  c.reenqueue_cap = 7;
  c.contention_eviction = true;
  const auto back = sim_config_from_json(to_json(c));
  EXPECT_EQ(back.reenqueue_cap, 7u);
  EXPECT_TRUE(back.contention_eviction);
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(sim_config_from_json({{"nope", 1}}), ConfigError);
}
