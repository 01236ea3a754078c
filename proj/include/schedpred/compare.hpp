#pragma once

#include <cstdint>
#include <optional>

#include <nlohmann/json.hpp>

#include "schedpred/simulator.hpp"

namespace schedpred {

/// Predictive-versus-baseline differences over the same task set. Flip
/// percentages are relative to the number of tasks; delta percentages are
/// relative to the baseline value (absent when it is zero).
struct Improvement {
  std::size_t n_tasks = 0;
  std::size_t flipped_to_success_count = 0;  // baseline not finished, predictive finished
  std::size_t flipped_to_failure_count = 0;  // baseline finished, predictive not finished
  double flipped_to_success = 0.0;           // percent of tasks
  double flipped_to_failure = 0.0;
  std::int64_t delta_finished_tasks = 0;
  std::optional<double> delta_finished_tasks_pct;
  std::int64_t delta_finished_jobs = 0;
  std::optional<double> delta_finished_jobs_pct;
  std::int64_t delta_execution_time = 0;  // microseconds
  std::optional<double> delta_execution_time_pct;
};

/// Throws LedgerMismatch unless both ledgers hold the same task identities.
Improvement compare_results(const SimResult& baseline, const SimResult& predictive);

nlohmann::json to_json(const Improvement& imp);

}  // namespace schedpred
