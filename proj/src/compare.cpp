#include "schedpred/compare.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "schedpred/errors.hpp"

namespace schedpred {

namespace {

std::optional<double> percent_change(double delta, double base) {
  if (base == 0.0) return std::nullopt;
  return 100.0 * delta / base;
}

}  // namespace

Improvement compare_results(const SimResult& baseline, const SimResult& predictive) {
  if (baseline.ledger.size() != predictive.ledger.size()) {
    throw LedgerMismatch("ledgers hold " + std::to_string(baseline.ledger.size()) + " and " +
                         std::to_string(predictive.ledger.size()) + " tasks");
  }
  std::map<std::pair<std::uint64_t, std::uint64_t>, FinalStatus> base;
  for (const LedgerEntry& e : baseline.ledger) {
    if (!base.emplace(std::pair{e.job_id, e.task_index}, e.final_status).second) {
      throw LedgerMismatch("duplicate task in baseline ledger");
    }
  }
  Improvement imp;
  imp.n_tasks = base.size();
  std::size_t matched = 0;
  for (const LedgerEntry& e : predictive.ledger) {
    const auto it = base.find({e.job_id, e.task_index});
    if (it == base.end()) {
      throw LedgerMismatch("task " + std::to_string(e.job_id) + "/" + std::to_string(e.task_index) +
                           " missing from baseline ledger");
    }
    ++matched;
    const bool before = it->second == FinalStatus::Finished;
    const bool after = e.final_status == FinalStatus::Finished;
    if (!before && after) ++imp.flipped_to_success_count;
    if (before && !after) ++imp.flipped_to_failure_count;
  }
  if (matched != imp.n_tasks) throw LedgerMismatch("duplicate task in predictive ledger");

  if (imp.n_tasks > 0) {
    const auto n = static_cast<double>(imp.n_tasks);
    imp.flipped_to_success = 100.0 * static_cast<double>(imp.flipped_to_success_count) / n;
    imp.flipped_to_failure = 100.0 * static_cast<double>(imp.flipped_to_failure_count) / n;
  }
  const auto b_tasks = static_cast<std::int64_t>(baseline.finished_tasks());
  const auto b_jobs = static_cast<std::int64_t>(baseline.finished_jobs());
  imp.delta_finished_tasks = static_cast<std::int64_t>(predictive.finished_tasks()) - b_tasks;
  imp.delta_finished_jobs = static_cast<std::int64_t>(predictive.finished_jobs()) - b_jobs;
  imp.delta_execution_time = predictive.total_execution_time - baseline.total_execution_time;
  imp.delta_finished_tasks_pct =
      percent_change(static_cast<double>(imp.delta_finished_tasks), static_cast<double>(b_tasks));
  imp.delta_finished_jobs_pct =
      percent_change(static_cast<double>(imp.delta_finished_jobs), static_cast<double>(b_jobs));
  imp.delta_execution_time_pct = percent_change(static_cast<double>(imp.delta_execution_time),
                                                static_cast<double>(baseline.total_execution_time));
  return imp;
}

nlohmann::json to_json(const Improvement& imp) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  return {{"n_tasks", imp.n_tasks},
          {"flipped_to_success_count", imp.flipped_to_success_count},
          {"flipped_to_failure_count", imp.flipped_to_failure_count},
          {"flipped_to_success_pct", imp.flipped_to_success},
          {"flipped_to_failure_pct", imp.flipped_to_failure},
          {"delta_finished_tasks", imp.delta_finished_tasks},
          {"delta_finished_tasks_pct", opt(imp.delta_finished_tasks_pct)},
          {"delta_finished_jobs", imp.delta_finished_jobs},
          {"delta_finished_jobs_pct", opt(imp.delta_finished_jobs_pct)},
          {"delta_execution_time_us", imp.delta_execution_time},
          {"delta_execution_time_pct", opt(imp.delta_execution_time_pct)}};
}

}  // namespace schedpred
