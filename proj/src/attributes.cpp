#include "schedpred/attributes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "schedpred/errors.hpp"

namespace schedpred {

const std::vector<std::string> kTaskAttributeColumns = {
    "job_id",           "task_index",    "waiting_time",  "service_time",     "scheduling_class",
    "priority",         "requested_cpu", "requested_ram", "requested_disk",   "used_cpu",
    "used_ram",         "used_disk",     "prev_finished", "prev_killed",      "prev_failed",
    "prev_evicted",     "prev_lost",     "prev_unscheduled", "reschedule_count", "final_status"};

const std::vector<std::string> kJobAttributeColumns = {
    "job_id",   "waiting_time", "service_time", "scheduling_class", "n_finished",    "n_killed",
    "n_failed", "n_evicted",    "n_lost",       "n_unscheduled",    "total_tasks",   "final_status"};

void PriorCounts::add(FinalStatus status) {
  switch (status) {
    case FinalStatus::Finished: ++finished; break;
    case FinalStatus::Failed: ++failed; break;
    case FinalStatus::Killed: ++killed; break;
    case FinalStatus::Evicted: ++evicted; break;
    case FinalStatus::Lost: ++lost; break;
    case FinalStatus::Unscheduled: ++unscheduled; break;
  }
}

TaskAttributes build_task_attributes(std::span<const TaskEvent> events,
                                     std::span<const UsageRecord> usage,
                                     const PriorCounts& prior) {
  auto submit_it = std::find_if(events.begin(), events.end(),
                                [](const TaskEvent& e) { return e.event == EventType::Submit; });
  if (submit_it == events.end()) {
    throw MissingSubmit("task history has no Submit event");
  }
  const TaskEvent& first_submit = *submit_it;

  TaskAttributes a;
  a.job_id = first_submit.job_id;
  a.task_index = first_submit.task_index;
  a.scheduling_class = first_submit.scheduling_class;
  a.priority = first_submit.priority;

  std::vector<EventType> types;
  types.reserve(events.size());
  std::optional<std::size_t> first_schedule;
  std::optional<std::size_t> last_schedule;
  std::uint64_t submits = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const TaskEvent& e = events[i];
    types.push_back(e.event);
    if (e.event == EventType::Submit) ++submits;
    if (e.event == EventType::Schedule) {
      if (!first_schedule) first_schedule = i;
      last_schedule = i;
    }
    if (e.cpu_request) a.requested_cpu = *e.cpu_request;
    if (e.ram_request) a.requested_ram = *e.ram_request;
    if (e.disk_request) a.requested_disk = *e.disk_request;
  }
  a.reschedule_count = submits - 1;

  const std::int64_t last_seen = events.back().timestamp;
  if (first_schedule) {
    a.waiting_time = events[*first_schedule].timestamp - first_submit.timestamp;
    std::int64_t end = last_seen;
    for (std::size_t i = *last_schedule + 1; i < events.size(); ++i) {
      if (is_terminal(events[i].event)) {
        end = events[i].timestamp;
        break;
      }
    }
    a.service_time = end - events[*last_schedule].timestamp;
  } else {
    a.waiting_time = last_seen - first_submit.timestamp;
  }
  a.waiting_time = std::max<std::int64_t>(0, a.waiting_time);
  a.service_time = std::max<std::int64_t>(0, a.service_time);

  a.final_status = classify_final_status(types, events.back().missing_info);

  a.prev_finished = prior.finished;
  a.prev_killed = prior.killed;
  a.prev_failed = prior.failed;
  a.prev_evicted = prior.evicted;
  a.prev_lost = prior.lost;
  a.prev_unscheduled = prior.unscheduled;

  if (!usage.empty()) {
    for (const UsageRecord& u : usage) {
      a.used_cpu += u.cpu_used;
      a.used_ram += u.ram_used;
      a.used_disk += u.disk_used;
    }
    const auto n = static_cast<double>(usage.size());
    a.used_cpu /= n;
    a.used_ram /= n;
    a.used_disk /= n;
  }
  return a;
}

JobAttributes build_job_attributes(std::span<const TaskAttributes> tasks,
                                   std::span<const JobEvent> job_events) {
  JobAttributes j;
  if (!tasks.empty()) {
    j.job_id = tasks.front().job_id;
    j.scheduling_class = tasks.front().scheduling_class;
  } else if (!job_events.empty()) {
    j.job_id = job_events.front().job_id;
  }
  for (const TaskAttributes& t : tasks) {
    switch (t.final_status) {
      case FinalStatus::Finished: ++j.n_finished; break;
      case FinalStatus::Killed: ++j.n_killed; break;
      case FinalStatus::Failed: ++j.n_failed; break;
      case FinalStatus::Evicted: ++j.n_evicted; break;
      case FinalStatus::Lost: ++j.n_lost; break;
      case FinalStatus::Unscheduled: ++j.n_unscheduled; break;
    }
  }
  j.total_tasks = tasks.size();

  std::vector<EventType> types;
  std::optional<std::int64_t> submit, first_schedule, last_schedule;
  std::int64_t end = -1;  // terminal event after the last Schedule
  for (const JobEvent& e : job_events) {
    types.push_back(e.event);
    if (e.event == EventType::Submit) {
      if (!submit) {
        submit = e.timestamp;
        j.scheduling_class = e.scheduling_class;
      }
    } else if (e.event == EventType::Schedule) {
      if (!first_schedule) first_schedule = e.timestamp;
      last_schedule = e.timestamp;
      end = -1;
    } else if (is_terminal(e.event) && last_schedule && end < 0) {
      end = e.timestamp;
    }
  }
  if (submit && !job_events.empty()) {
    const std::int64_t last_seen = job_events.back().timestamp;
    j.waiting_time = std::max<std::int64_t>(0, first_schedule.value_or(last_seen) - *submit);
    if (last_schedule) j.service_time = std::max<std::int64_t>(0, (end >= 0 ? end : last_seen) - *last_schedule);
  }
  j.final_status = classify_final_status(types, !job_events.empty() && job_events.back().missing_info);
  return j;
}

AttributeTables build_attribute_tables(std::span<const TaskEvent> task_events,
                                       std::span<const JobEvent> job_events,
                                       std::span<const UsageRecord> usage) {
  using Key = std::pair<std::uint64_t, std::uint64_t>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<std::uint64_t>()(k.first * 0x9E3779B97F4A7C15ULL ^ k.second);
    }
  };

  std::unordered_map<Key, std::size_t, KeyHash> slot_of;
  std::vector<std::vector<TaskEvent>> histories;
  std::vector<Key> keys;
  for (const TaskEvent& e : task_events) {
    const Key key{e.job_id, e.task_index};
    auto [it, inserted] = slot_of.try_emplace(key, histories.size());
    if (inserted) {
      histories.emplace_back();
      keys.push_back(key);
    }
    histories[it->second].push_back(e);
  }
  std::vector<std::vector<UsageRecord>> usage_of(histories.size());
  for (const UsageRecord& u : usage) {
    auto it = slot_of.find({u.job_id, u.task_index});
    if (it != slot_of.end()) usage_of[it->second].push_back(u);
  }

  auto by_time = [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; };
  // job id -> slots, ordered by (first submit, first appearance)
  std::map<std::uint64_t, std::vector<std::size_t>> job_tasks;
  std::vector<std::int64_t> first_submit(histories.size(), -1);
  AttributeTables tables;
  for (std::size_t s = 0; s < histories.size(); ++s) {
    auto& h = histories[s];
    std::stable_sort(h.begin(), h.end(), by_time);
    for (const TaskEvent& e : h) {
      if (e.event == EventType::Submit) {
        first_submit[s] = e.timestamp;
        break;
      }
    }
    if (first_submit[s] < 0) {
      ++tables.skipped_tasks;
      continue;
    }
    job_tasks[keys[s].first].push_back(s);
  }

  std::map<std::uint64_t, std::vector<JobEvent>> job_history;
  for (const JobEvent& e : job_events) job_history[e.job_id].push_back(e);
  for (auto& [id, h] : job_history) std::stable_sort(h.begin(), h.end(), by_time);

  for (auto& [job_id, slots] : job_tasks) {
    std::stable_sort(slots.begin(), slots.end(), [&](std::size_t a, std::size_t b) {
      return first_submit[a] < first_submit[b];
    });
    PriorCounts prior;
    const std::size_t begin = tables.tasks.size();
    for (std::size_t s : slots) {
      tables.tasks.push_back(build_task_attributes(histories[s], usage_of[s], prior));
      prior.add(tables.tasks.back().final_status);
    }
    auto jh = job_history.find(job_id);
    std::span<const JobEvent> jev;
    if (jh != job_history.end()) jev = jh->second;
    tables.jobs.push_back(build_job_attributes(
        std::span<const TaskAttributes>(tables.tasks).subspan(begin, slots.size()), jev));
    tables.jobs.back().job_id = job_id;
  }
  // Jobs with events but no task history in the window.
  for (const auto& [job_id, h] : job_history) {
    if (job_tasks.count(job_id) != 0) continue;
    tables.jobs.push_back(build_job_attributes({}, h));
  }
  std::sort(tables.jobs.begin(), tables.jobs.end(),
            [](const JobAttributes& a, const JobAttributes& b) { return a.job_id < b.job_id; });
  return tables;
}

// Summaries ------------------------------------------------------------------

FiveNumber five_number_summary(std::vector<double> values) {
  if (values.empty()) throw EmptyInput("five_number_summary: no values");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  return {values.front(), quantile(0.25), quantile(0.5), quantile(0.75), values.back()};
}

namespace {

template <typename Record>
StatusSummary summarize_records(std::span<const Record> records) {
  if (records.empty()) throw EmptyInput("summarize: no records");
  StatusCounts counts{};
  std::array<std::vector<double>, kNumFinalStatuses> waits, services;
  for (const Record& r : records) {
    const std::size_t i = index_of(r.final_status);
    ++counts[i];
    waits[i].push_back(static_cast<double>(r.waiting_time) / 1e6);
    services[i].push_back(static_cast<double>(r.service_time) / 1e6);
  }
  StatusSummary s = summarize_counts(counts);
  for (std::size_t i = 0; i < kNumFinalStatuses; ++i) {
    if (waits[i].empty()) continue;
    s.rows[i].waiting = five_number_summary(std::move(waits[i]));
    s.rows[i].service = five_number_summary(std::move(services[i]));
  }
  return s;
}

nlohmann::json five_json(const std::optional<FiveNumber>& f) {
  if (!f) return nullptr;
  return {{"min", f->min}, {"q1", f->q1}, {"median", f->median}, {"q3", f->q3}, {"max", f->max}};
}

void put_double(std::ostream& out, double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.write(buf.data(), ptr - buf.data());
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
T field(std::string_view text, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw MalformedRow(line_no, "unparsable field '" + std::string(text) + "'");
  }
  return value;
}

FinalStatus status_field(std::string_view text, std::size_t line_no) {
  auto s = final_status_from_string(text);
  if (!s) throw MalformedRow(line_no, "unknown final status '" + std::string(text) + "'");
  return *s;
}

void check_header(std::istream& in, const std::vector<std::string>& expected, std::string& line) {
  if (!std::getline(in, line)) throw SchemaMismatch("attribute file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto cols = split_csv(line);
  if (cols.size() != expected.size() || !std::equal(cols.begin(), cols.end(), expected.begin())) {
    throw SchemaMismatch("attribute header does not match: " + line);
  }
}

template <typename Record, typename ParseRow>
std::vector<Record> read_rows(std::istream& in, const std::vector<std::string>& columns,
                              ParseRow parse) {
  std::string line;
  check_header(in, columns, line);
  std::vector<Record> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != columns.size()) throw MalformedRow(line_no, "arity");
    out.push_back(parse(f, line_no));
  }
  return out;
}

}  // namespace

StatusSummary summarize(std::span<const TaskAttributes> tasks) { return summarize_records(tasks); }
StatusSummary summarize(std::span<const JobAttributes> jobs) { return summarize_records(jobs); }

StatusSummary summarize_counts(const StatusCounts& counts) {
  StatusSummary s;
  for (std::size_t c : counts) s.total += c;
  if (s.total == 0) throw EmptyInput("summarize: no records");
  for (std::size_t i = 0; i < kNumFinalStatuses; ++i) {
    s.rows[i].status = kAllFinalStatuses[i];
    s.rows[i].count = counts[i];
    s.rows[i].percent = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(s.total);
  }
  return s;
}

nlohmann::json to_json(const StatusSummary& s) {
  nlohmann::json rows = nlohmann::json::array();
  for (const StatusRow& r : s.rows) {
    rows.push_back({{"status", std::string(to_string(r.status))},
                    {"count", r.count},
                    {"percent", r.percent},
                    {"waiting_s", five_json(r.waiting)},
                    {"service_s", five_json(r.service)}});
  }
  return {{"total", s.total}, {"rows", rows}};
}

void write_task_attributes_csv(std::ostream& out, std::span<const TaskAttributes> tasks) {
  for (std::size_t i = 0; i < kTaskAttributeColumns.size(); ++i) {
    out << (i ? "," : "") << kTaskAttributeColumns[i];
  }
  out << '\n';
  for (const TaskAttributes& t : tasks) {
    out << t.job_id << ',' << t.task_index << ',' << t.waiting_time << ',' << t.service_time << ','
        << t.scheduling_class << ',' << t.priority << ',';
    for (double v : {t.requested_cpu, t.requested_ram, t.requested_disk, t.used_cpu, t.used_ram,
                     t.used_disk}) {
      put_double(out, v);
      out << ',';
    }
    out << t.prev_finished << ',' << t.prev_killed << ',' << t.prev_failed << ','
        << t.prev_evicted << ',' << t.prev_lost << ',' << t.prev_unscheduled << ','
        << t.reschedule_count << ',' << to_string(t.final_status) << '\n';
  }
}

void write_job_attributes_csv(std::ostream& out, std::span<const JobAttributes> jobs) {
  for (std::size_t i = 0; i < kJobAttributeColumns.size(); ++i) {
    out << (i ? "," : "") << kJobAttributeColumns[i];
  }
  out << '\n';
  for (const JobAttributes& j : jobs) {
    out << j.job_id << ',' << j.waiting_time << ',' << j.service_time << ','
        << j.scheduling_class << ',' << j.n_finished << ',' << j.n_killed << ',' << j.n_failed
        << ',' << j.n_evicted << ',' << j.n_lost << ',' << j.n_unscheduled << ','
        << j.total_tasks << ',' << to_string(j.final_status) << '\n';
  }
}

std::vector<TaskAttributes> read_task_attributes_csv(std::istream& in) {
  return read_rows<TaskAttributes>(in, kTaskAttributeColumns, [](const auto& f, std::size_t n) {
    TaskAttributes t;
    t.job_id = field<std::uint64_t>(f[0], n);
    t.task_index = field<std::uint64_t>(f[1], n);
    t.waiting_time = field<std::int64_t>(f[2], n);
    t.service_time = field<std::int64_t>(f[3], n);
    t.scheduling_class = field<int>(f[4], n);
    t.priority = field<int>(f[5], n);
    t.requested_cpu = field<double>(f[6], n);
    t.requested_ram = field<double>(f[7], n);
    t.requested_disk = field<double>(f[8], n);
    t.used_cpu = field<double>(f[9], n);
    t.used_ram = field<double>(f[10], n);
    t.used_disk = field<double>(f[11], n);
    t.prev_finished = field<std::uint64_t>(f[12], n);
    t.prev_killed = field<std::uint64_t>(f[13], n);
    t.prev_failed = field<std::uint64_t>(f[14], n);
    t.prev_evicted = field<std::uint64_t>(f[15], n);
    t.prev_lost = field<std::uint64_t>(f[16], n);
    t.prev_unscheduled = field<std::uint64_t>(f[17], n);
    t.reschedule_count = field<std::uint64_t>(f[18], n);
    t.final_status = status_field(f[19], n);
    return t;
  });
}

std::vector<JobAttributes> read_job_attributes_csv(std::istream& in) {
  return read_rows<JobAttributes>(in, kJobAttributeColumns, [](const auto& f, std::size_t n) {
    JobAttributes j;
    j.job_id = field<std::uint64_t>(f[0], n);
    j.waiting_time = field<std::int64_t>(f[1], n);
    j.service_time = field<std::int64_t>(f[2], n);
    j.scheduling_class = field<int>(f[3], n);
    j.n_finished = field<std::uint64_t>(f[4], n);
    j.n_killed = field<std::uint64_t>(f[5], n);
    j.n_failed = field<std::uint64_t>(f[6], n);
    j.n_evicted = field<std::uint64_t>(f[7], n);
    j.n_lost = field<std::uint64_t>(f[8], n);
    j.n_unscheduled = field<std::uint64_t>(f[9], n);
    j.total_tasks = field<std::uint64_t>(f[10], n);
    j.final_status = status_field(f[11], n);
    return j;
  });
}

}  // namespace schedpred
