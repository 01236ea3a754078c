#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "schedpred/attributes.hpp"
#include "schedpred/synthetic.hpp"

using namespace schedpred;

namespace {

constexpr std::int64_t kSec = 1'000'000;

TaskEvent ev(std::int64_t t, EventType type, std::uint64_t job = 1, std::uint64_t task = 0) {
  TaskEvent e;
  e.timestamp = t;
  e.job_id = job;
  e.task_index = task;
  e.event = type;
  e.priority = 3;
  e.scheduling_class = 1;
  e.cpu_request = 0.25;
  e.ram_request = 0.125;
  e.disk_request = 0.01;
  return e;
}

StatusCounts counts_of(std::initializer_list<std::pair<FinalStatus, std::size_t>> items) {
  StatusCounts c{};
  for (auto [s, n] : items) c[index_of(s)] = n;
  return c;
}

}  // namespace

TEST(TaskAttributes, WaitingAndServiceTime) {
  const std::vector<TaskEvent> h = {ev(0, EventType::Submit), ev(5 * kSec, EventType::Schedule),
                                    ev(65 * kSec, EventType::Finish)};
  const auto a = build_task_attributes(h, {}, {});
  EXPECT_EQ(a.waiting_time, 5 * kSec);
  EXPECT_EQ(a.service_time, 60 * kSec);
  EXPECT_EQ(a.final_status, FinalStatus::Finished);
  EXPECT_EQ(a.reschedule_count, 0u);
  EXPECT_DOUBLE_EQ(a.requested_cpu, 0.25);
  EXPECT_EQ(a.priority, 3);
}

TEST(TaskAttributes, ServiceMeasuredFromLastSchedule) {
  const std::vector<TaskEvent> h = {
      ev(0, EventType::Submit),         ev(2 * kSec, EventType::Schedule),
      ev(10 * kSec, EventType::Evict),  ev(11 * kSec, EventType::Submit),
      ev(20 * kSec, EventType::Schedule), ev(50 * kSec, EventType::Finish)};
  const auto a = build_task_attributes(h, {}, {});
  EXPECT_EQ(a.waiting_time, 2 * kSec);
  EXPECT_EQ(a.service_time, 30 * kSec);
  EXPECT_EQ(a.reschedule_count, 1u);
}

TEST(TaskAttributes, NeverScheduled) {
  const std::vector<TaskEvent> h = {ev(0, EventType::Submit), ev(9 * kSec, EventType::UpdatePending)};
  const auto a = build_task_attributes(h, {}, {});
  EXPECT_EQ(a.final_status, FinalStatus::Unscheduled);
  EXPECT_EQ(a.waiting_time, 9 * kSec);
  EXPECT_EQ(a.service_time, 0);
}

TEST(TaskAttributes, TwoResubmissions) {
  std::vector<TaskEvent> h;
  std::int64_t t = 0;
  for (int i = 0; i < 3; ++i) {
    h.push_back(ev(t++, EventType::Submit));
    h.push_back(ev(t++, EventType::Schedule));
    h.push_back(ev(t++, i < 2 ? EventType::Evict : EventType::Finish));
  }
  EXPECT_EQ(build_task_attributes(h, {}, {}).reschedule_count, 2u);
}

TEST(TaskAttributes, MissingSubmit) {
  const std::vector<TaskEvent> h = {ev(1, EventType::Schedule), ev(2, EventType::Finish)};
  EXPECT_THROW(build_task_attributes(h, {}, {}), MissingSubmit);
}

TEST(TaskAttributes, UsageAveraged) {
  const std::vector<TaskEvent> h = {ev(0, EventType::Submit), ev(1, EventType::Schedule),
                                    ev(3, EventType::Finish)};
  const std::vector<UsageRecord> u = {{1, 2, 1, 0, 0.1, 0.2, 0.3}, {2, 3, 1, 0, 0.3, 0.4, 0.5}};
  const auto a = build_task_attributes(h, u, {});
  EXPECT_DOUBLE_EQ(a.used_cpu, 0.2);
  EXPECT_DOUBLE_EQ(a.used_ram, 0.3);
  EXPECT_DOUBLE_EQ(a.used_disk, 0.4);
}

TEST(AttributeTables, PriorCountsFollowSubmissionOrder) {
  std::vector<TaskEvent> events;
  for (std::uint64_t k = 0; k < 3; ++k) {
    const std::int64_t base = static_cast<std::int64_t>(k) * 100;
    events.push_back(ev(base, EventType::Submit, 9, k));
    events.push_back(ev(base + 1, EventType::Schedule, 9, k));
    events.push_back(ev(base + 2, k < 2 ? EventType::Fail : EventType::Finish, 9, k));
  }
  const auto tables = build_attribute_tables(events, {}, {});
  ASSERT_EQ(tables.tasks.size(), 3u);
  EXPECT_EQ(tables.tasks[0].prev_failed, 0u);
  EXPECT_EQ(tables.tasks[1].prev_failed, 1u);
  EXPECT_EQ(tables.tasks[2].prev_failed, 2u);
  EXPECT_EQ(tables.tasks[2].prev_finished, 0u);
  ASSERT_EQ(tables.jobs.size(), 1u);
  EXPECT_EQ(tables.jobs[0].n_failed, 2u);
  EXPECT_EQ(tables.jobs[0].n_finished, 1u);
}

TEST(AttributeTables, HistoriesWithoutSubmitAreSkipped) {
  const std::vector<TaskEvent> events = {ev(0, EventType::Schedule, 1, 0), ev(1, EventType::Finish, 1, 0),
                                         ev(0, EventType::Submit, 1, 1)};
  const auto tables = build_attribute_tables(events, {}, {});
  EXPECT_EQ(tables.skipped_tasks, 1u);
  EXPECT_EQ(tables.tasks.size(), 1u);
}

TEST(JobAttributes, CountsByStatus) {
  std::vector<TaskAttributes> tasks(3);
  tasks[0].final_status = FinalStatus::Finished;
  tasks[1].final_status = FinalStatus::Finished;
  tasks[2].final_status = FinalStatus::Killed;
  for (auto& t : tasks) t.job_id = 5;
  const std::vector<JobEvent> jev = {{0, false, 5, EventType::Submit, 2},
                                     {10, false, 5, EventType::Schedule, 2},
                                     {70, false, 5, EventType::Fail, 2}};
  const auto j = build_job_attributes(tasks, jev);
  EXPECT_EQ(j.n_finished, 2u);
  EXPECT_EQ(j.n_killed, 1u);
  EXPECT_EQ(j.total_tasks, 3u);
  EXPECT_EQ(j.final_status, FinalStatus::Failed);
  EXPECT_EQ(j.waiting_time, 10);
  EXPECT_EQ(j.service_time, 60);
  EXPECT_EQ(j.scheduling_class, 2);
}

TEST(JobAttributes, NothingScheduled) {
  std::vector<TaskAttributes> tasks(4);
  for (auto& t : tasks) t.final_status = FinalStatus::Unscheduled;
  const auto j = build_job_attributes(tasks, {});
  EXPECT_EQ(j.n_unscheduled, j.total_tasks);
}

TEST(JobAttributes, PartitionOnSyntheticJobs) {
  SyntheticConfig c;
  c.n_jobs = 300;
  c.tasks_per_job = {TasksPerJob::Kind::Uniform, 1, 20};
  c.unscheduled_prob = 0.05;
  c.resubmit_prob = 0.4;
  const auto trace = generate_synthetic_trace(c);
  const auto tables = build_attribute_tables(trace.task_events, trace.job_events, trace.usage);
  ASSERT_EQ(tables.jobs.size(), 300u);
  std::size_t tasks = 0;
  for (const auto& j : tables.jobs) {
    EXPECT_EQ(j.n_finished + j.n_killed + j.n_failed + j.n_evicted + j.n_lost + j.n_unscheduled,
              j.total_tasks);
    tasks += j.total_tasks;
  }
  EXPECT_EQ(tasks, tables.tasks.size());
}

TEST(Summary, PublishedJobDistribution) {
  const auto s = summarize_counts(counts_of({{FinalStatus::Finished, 379586},
                                             {FinalStatus::Killed, 255280},
                                             {FinalStatus::Failed, 9080},
                                             {FinalStatus::Evicted, 14},
                                             {FinalStatus::Lost, 0},
                                             {FinalStatus::Unscheduled, 5169}}));
  EXPECT_EQ(s.total, 649129u);
  EXPECT_NEAR(s.rows[index_of(FinalStatus::Finished)].percent, 58.47, 0.01);
  EXPECT_NEAR(s.rows[index_of(FinalStatus::Killed)].percent, 39.33, 0.01);
}

TEST(Summary, PublishedTaskDistribution) {
  const auto s = summarize_counts(counts_of({{FinalStatus::Finished, 33020},
                                             {FinalStatus::Killed, 8473},
                                             {FinalStatus::Failed, 7044},
                                             {FinalStatus::Evicted, 12798},
                                             {FinalStatus::Lost, 0},
                                             {FinalStatus::Unscheduled, 1897}}));
  // The published rows add up to 63232; the table's total line says 63234.
  EXPECT_EQ(s.total, 63232u);
  EXPECT_NEAR(s.rows[index_of(FinalStatus::Evicted)].percent, 20.24, 0.01);
  EXPECT_NEAR(s.rows[index_of(FinalStatus::Finished)].percent, 52.22, 0.01);
}

TEST(Summary, AllFinishedAndPercentSum) {
  std::vector<TaskAttributes> tasks(10);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    tasks[i].final_status = FinalStatus::Finished;
    tasks[i].waiting_time = static_cast<std::int64_t>(i) * kSec;
  }
  const auto s = summarize(tasks);
  EXPECT_DOUBLE_EQ(s.rows[index_of(FinalStatus::Finished)].percent, 100.0);
  for (FinalStatus st : kAllFinalStatuses) {
    if (st != FinalStatus::Finished) {
      EXPECT_DOUBLE_EQ(s.rows[index_of(st)].percent, 0.0);
    }
  }
  ASSERT_TRUE(s.rows[0].waiting.has_value());
  EXPECT_DOUBLE_EQ(s.rows[0].waiting->median, 4.5);
  EXPECT_DOUBLE_EQ(s.rows[0].waiting->max, 9.0);

  SyntheticConfig c;
  c.n_jobs = 97;
  c.tasks_per_job = {TasksPerJob::Kind::Uniform, 1, 9};
  c.unscheduled_prob = 0.03;
  const auto trace = generate_synthetic_trace(c);
  const auto tables = build_attribute_tables(trace.task_events, trace.job_events, trace.usage);
  for (const auto& sum : {summarize(tables.tasks), summarize(tables.jobs)}) {
    double total = 0.0;
    for (const auto& r : sum.rows) total += r.percent;
    EXPECT_NEAR(total, 100.0, 0.01);
  }
  EXPECT_THROW(summarize(std::vector<TaskAttributes>{}), EmptyInput);
}

TEST(FiveNumber, LinearInterpolation) {
  const auto f = five_number_summary({4.0, 1.0, 3.0, 2.0});
  EXPECT_DOUBLE_EQ(f.min, 1.0);
  EXPECT_DOUBLE_EQ(f.q1, 1.75);
  EXPECT_DOUBLE_EQ(f.median, 2.5);
  EXPECT_DOUBLE_EQ(f.q3, 3.25);
  EXPECT_DOUBLE_EQ(f.max, 4.0);
}

TEST(AttributeCsv, RoundTrip) {
  SyntheticConfig c;
  c.n_jobs = 40;
  c.tasks_per_job = {TasksPerJob::Kind::Uniform, 1, 6};
  const auto trace = generate_synthetic_trace(c);
  const auto tables = build_attribute_tables(trace.task_events, trace.job_events, trace.usage);
  std::stringstream ts, js;
  write_task_attributes_csv(ts, tables.tasks);
  write_job_attributes_csv(js, tables.jobs);
  const auto tasks = read_task_attributes_csv(ts);
  const auto jobs = read_job_attributes_csv(js);
  ASSERT_EQ(tasks.size(), tables.tasks.size());
  ASSERT_EQ(jobs.size(), tables.jobs.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    EXPECT_EQ(tasks[i].job_id, tables.tasks[i].job_id);
    EXPECT_EQ(tasks[i].prev_failed, tables.tasks[i].prev_failed);
    EXPECT_EQ(tasks[i].final_status, tables.tasks[i].final_status);
    EXPECT_NEAR(tasks[i].requested_cpu, tables.tasks[i].requested_cpu, 1e-12);
    EXPECT_EQ(tasks[i].waiting_time, tables.tasks[i].waiting_time);
  }
  EXPECT_EQ(jobs[0].total_tasks, tables.jobs[0].total_tasks);
}
