#include "schedpred/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "schedpred/errors.hpp"
#include "schedpred/rng.hpp"

namespace schedpred {

namespace {

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

std::int64_t to_micros(double seconds) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(seconds * 1e6)));
}

constexpr std::uint64_t kFirstJobId = 4'000'000'000ULL;
constexpr std::int64_t kTraceStart = 600'000'000;  // traces open 600 s in
constexpr std::array<double, 4> kSchedulingClassWeights = {0.35, 0.35, 0.2, 0.1};

struct Attempt {
  std::int64_t submit = 0;
  std::int64_t schedule = 0;
  std::int64_t end = 0;
  std::uint64_t machine = 0;
  EventType outcome = EventType::Finish;
};

}  // namespace

void SyntheticConfig::validate() const {
  if (n_jobs < 1) throw ConfigError("n_jobs must be at least 1");
  if (tasks_per_job.min < 1) throw ConfigError("tasks_per_job must be at least 1");
  if (tasks_per_job.kind == TasksPerJob::Kind::Uniform && tasks_per_job.max < tasks_per_job.min) {
    throw ConfigError("tasks_per_job range is empty");
  }
  require_probability(base_fail_prob, "base_fail_prob");
  require_probability(history_fail_boost, "history_fail_boost");
  require_probability(low_priority_evict_prob, "low_priority_evict_prob");
  require_probability(kill_fraction, "kill_fraction");
  require_probability(resubmit_prob, "resubmit_prob");
  require_probability(unscheduled_prob, "unscheduled_prob");
  require_probability(low_priority_share, "low_priority_share");
  if (priority_threshold < 0 || priority_threshold > 12) {
    throw ConfigError("priority_threshold must lie in [0, 12]");
  }
  if (!(job_interarrival_s > 0.0)) throw ConfigError("job_interarrival_s must be positive");
  if (!(wait_log_sigma >= 0.0) || !(service_log_sigma >= 0.0)) {
    throw ConfigError("log-normal sigmas must be non-negative");
  }
}

nlohmann::json to_json(const SyntheticConfig& c) {
  nlohmann::json tpj;
  if (c.tasks_per_job.kind == TasksPerJob::Kind::Constant) {
    tpj = {{"kind", "constant"}, {"value", c.tasks_per_job.min}};
  } else {
    tpj = {{"kind", "uniform"}, {"min", c.tasks_per_job.min}, {"max", c.tasks_per_job.max}};
  }
  return {
      {"n_jobs", c.n_jobs},
      {"tasks_per_job", tpj},
      {"base_fail_prob", c.base_fail_prob},
      {"history_fail_boost", c.history_fail_boost},
      {"low_priority_evict_prob", c.low_priority_evict_prob},
      {"priority_threshold", c.priority_threshold},
      {"seed", c.seed},
      {"kill_fraction", c.kill_fraction},
      {"resubmit_prob", c.resubmit_prob},
      {"unscheduled_prob", c.unscheduled_prob},
      {"low_priority_share", c.low_priority_share},
      {"job_interarrival_s", c.job_interarrival_s},
      {"wait_log_mu", c.wait_log_mu},
      {"wait_log_sigma", c.wait_log_sigma},
      {"service_log_mu", c.service_log_mu},
      {"service_log_sigma", c.service_log_sigma},
  };
}

SyntheticConfig synthetic_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("synthetic config must be a JSON object");
  SyntheticConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n_jobs") {
        if (value.is_number_integer() && value.get<std::int64_t>() < 0) {
          throw ConfigError("n_jobs must be at least 1");
        }
        c.n_jobs = value.get<std::uint64_t>();
      } else if (key == "tasks_per_job") {
        if (value.is_number_unsigned()) {
          c.tasks_per_job = {TasksPerJob::Kind::Constant, value.get<std::uint64_t>(),
                             value.get<std::uint64_t>()};
        } else {
          const auto kind = value.at("kind").get<std::string>();
          if (kind == "constant") {
            const auto v = value.at("value").get<std::uint64_t>();
            c.tasks_per_job = {TasksPerJob::Kind::Constant, v, v};
          } else if (kind == "uniform") {
            c.tasks_per_job = {TasksPerJob::Kind::Uniform, value.at("min").get<std::uint64_t>(),
                               value.at("max").get<std::uint64_t>()};
          } else {
            throw ConfigError("tasks_per_job.kind must be constant or uniform");
          }
        }
      } else if (key == "base_fail_prob") {
        c.base_fail_prob = value.get<double>();
      } else if (key == "history_fail_boost") {
        c.history_fail_boost = value.get<double>();
      } else if (key == "low_priority_evict_prob") {
        c.low_priority_evict_prob = value.get<double>();
      } else if (key == "priority_threshold") {
        c.priority_threshold = value.get<int>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "kill_fraction") {
        c.kill_fraction = value.get<double>();
      } else if (key == "resubmit_prob") {
        c.resubmit_prob = value.get<double>();
      } else if (key == "unscheduled_prob") {
        c.unscheduled_prob = value.get<double>();
      } else if (key == "low_priority_share") {
        c.low_priority_share = value.get<double>();
      } else if (key == "job_interarrival_s") {
        c.job_interarrival_s = value.get<double>();
      } else if (key == "wait_log_mu") {
        c.wait_log_mu = value.get<double>();
      } else if (key == "wait_log_sigma") {
        c.wait_log_sigma = value.get<double>();
      } else if (key == "service_log_mu") {
        c.service_log_mu = value.get<double>();
      } else if (key == "service_log_sigma") {
        c.service_log_sigma = value.get<double>();
      } else {
        throw ConfigError("unknown synthetic config key: " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synthetic config: ") + e.what());
  }
  c.validate();
  return c;
}

SyntheticTrace generate_synthetic_trace(const SyntheticConfig& config) {
  config.validate();
  Rng rng(config.seed);
  SyntheticTrace trace;

  const int threshold = config.priority_threshold;
  const bool has_low = threshold > 0;
  const bool has_high = threshold <= 11;

  double clock_s = 0.0;
  std::vector<Attempt> attempts;
  for (std::uint64_t j = 0; j < config.n_jobs; ++j) {
    clock_s += rng.exponential(config.job_interarrival_s);
    const std::uint64_t job_id = kFirstJobId + j;
    const std::int64_t job_submit = kTraceStart + to_micros(clock_s);
    const int scheduling_class = static_cast<int>(rng.weighted(kSchedulingClassWeights));

    const bool low = has_low && (!has_high || rng.bernoulli(config.low_priority_share));
    const int priority = low ? static_cast<int>(rng.range(0, threshold - 1))
                             : static_cast<int>(rng.range(threshold, 11));

    std::uint64_t n_tasks = config.tasks_per_job.min;
    if (config.tasks_per_job.kind == TasksPerJob::Kind::Uniform) {
      n_tasks = static_cast<std::uint64_t>(
          rng.range(static_cast<std::int64_t>(config.tasks_per_job.min),
                    static_cast<std::int64_t>(config.tasks_per_job.max)));
    }

    trace.job_events.push_back({job_submit, false, job_id, EventType::Submit, scheduling_class});

    StatusCounts counts{};
    bool history_failure = false;
    std::int64_t job_first_schedule = -1;
    std::int64_t job_last_end = -1;

    for (std::uint64_t k = 0; k < n_tasks; ++k) {
      const std::int64_t submit = job_submit + static_cast<std::int64_t>(k);
      const double cpu = static_cast<double>(rng.range(1, 32)) / 128.0;
      const double ram = static_cast<double>(rng.range(1, 64)) / 256.0;
      const double disk = static_cast<double>(rng.range(1, 32)) / 4096.0;

      auto event_at = [&](std::int64_t ts, EventType type, std::optional<std::uint64_t> machine) {
        return TaskEvent{ts, false, job_id, k, machine, type, scheduling_class, priority,
                         cpu,  ram,   disk};
      };

      if (rng.bernoulli(config.unscheduled_prob)) {
        trace.task_events.push_back(event_at(submit, EventType::Submit, std::nullopt));
        ++counts[index_of(FinalStatus::Unscheduled)];
        continue;
      }

      const double fail_p =
          std::min(1.0, config.base_fail_prob + (history_failure ? config.history_fail_boost : 0.0));
      const bool fails = rng.bernoulli(fail_p);
      const bool killed = fails && rng.bernoulli(config.kill_fraction);

      attempts.clear();
      auto run_attempt = [&](std::int64_t at, EventType outcome) {
        Attempt a;
        a.submit = at;
        a.schedule = at + to_micros(rng.lognormal(config.wait_log_mu, config.wait_log_sigma));
        const std::int64_t service =
            to_micros(rng.lognormal(config.service_log_mu, config.service_log_sigma));
        const double fraction = outcome == EventType::Finish ? 1.0 : rng.uniform(0.1, 1.0);
        a.end = a.schedule + std::max<std::int64_t>(1, static_cast<std::int64_t>(
                                                           static_cast<double>(service) * fraction));
        a.machine = static_cast<std::uint64_t>(rng.range(1, 12500));
        a.outcome = outcome;
        attempts.push_back(a);
      };

      if (fails) {
        run_attempt(submit, killed ? EventType::Kill : EventType::Fail);
      } else if (priority < threshold && rng.bernoulli(config.low_priority_evict_prob)) {
        run_attempt(submit, EventType::Evict);
        // Evicted tasks may re-enter the queue; each retry is exposed to
        // eviction again. Bounded so histories stay finite.
        while (attempts.size() < 4 && rng.bernoulli(config.resubmit_prob)) {
          const bool again = rng.bernoulli(config.low_priority_evict_prob);
          run_attempt(attempts.back().end + 1, again ? EventType::Evict : EventType::Finish);
          if (!again) break;
        }
      } else {
        run_attempt(submit, EventType::Finish);
      }

      for (const Attempt& a : attempts) {
        trace.task_events.push_back(event_at(a.submit, EventType::Submit, std::nullopt));
        trace.task_events.push_back(event_at(a.schedule, EventType::Schedule, a.machine));
        trace.task_events.push_back(event_at(a.end, a.outcome, a.machine));
        trace.usage.push_back({a.schedule, a.end, job_id, k, cpu * rng.uniform(0.3, 1.1),
                               ram * rng.uniform(0.3, 1.1), disk * rng.uniform(0.3, 1.1)});
        if (job_first_schedule < 0 || a.schedule < job_first_schedule) job_first_schedule = a.schedule;
        job_last_end = std::max(job_last_end, a.end);
      }

      const FinalStatus status = status_of_terminal(attempts.back().outcome);
      ++counts[index_of(status)];
      if (status == FinalStatus::Failed || status == FinalStatus::Killed) history_failure = true;
    }

    const FinalStatus job_status = rollup_job_status(counts);
    if (job_status != FinalStatus::Unscheduled) {
      trace.job_events.push_back(
          {job_first_schedule, false, job_id, EventType::Schedule, scheduling_class});
      const EventType terminal = job_status == FinalStatus::Finished ? EventType::Finish
                                 : job_status == FinalStatus::Killed ? EventType::Kill
                                                                     : EventType::Fail;
      trace.job_events.push_back({job_last_end, false, job_id, terminal, scheduling_class});
    }
  }

  auto by_time = [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; };
  std::stable_sort(trace.task_events.begin(), trace.task_events.end(), by_time);
  std::stable_sort(trace.job_events.begin(), trace.job_events.end(), by_time);
  std::stable_sort(trace.usage.begin(), trace.usage.end(),
                   [](const UsageRecord& a, const UsageRecord& b) {
                     return a.window_start < b.window_start;
                   });
  return trace;
}

}  // namespace schedpred
