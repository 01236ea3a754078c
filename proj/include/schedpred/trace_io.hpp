#pragma once

// Streaming readers and writers for task-event, job-event and task-usage CSV
// files in the clusterdata-2011 column layout (no header row, optionally
// gzip-compressed).
//
// task_events: timestamp, missing info, job ID, task index, machine ID,
//              event type, user, scheduling class, priority, CPU request,
//              memory request, disk request, different-machine constraint
// job_events:  timestamp, missing info, job ID, event type, user,
//              scheduling class, job name, logical job name
// task_usage:  start, end, job ID, task index, machine ID, mean CPU,
//              canonical memory, assigned memory, unmapped page cache,
//              total page cache, max memory, mean disk I/O, mean local disk,
//              max CPU, max disk I/O, CPI, MAI, sample portion,
//              aggregation type[, sampled CPU]

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <iterator>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "schedpred/lifecycle.hpp"

namespace schedpred {

struct TaskEvent {
  std::int64_t timestamp = 0;  // microseconds
  bool missing_info = false;
  std::uint64_t job_id = 0;
  std::uint64_t task_index = 0;
  std::optional<std::uint64_t> machine_id;
  EventType event = EventType::Submit;
  int scheduling_class = 0;
  int priority = 0;
  std::optional<double> cpu_request;
  std::optional<double> ram_request;
  std::optional<double> disk_request;

  bool operator==(const TaskEvent&) const = default;
};

struct JobEvent {
  std::int64_t timestamp = 0;
  bool missing_info = false;
  std::uint64_t job_id = 0;
  EventType event = EventType::Submit;
  int scheduling_class = 0;

  bool operator==(const JobEvent&) const = default;
};

struct UsageRecord {
  std::int64_t window_start = 0;
  std::int64_t window_end = 0;
  std::uint64_t job_id = 0;
  std::uint64_t task_index = 0;
  double cpu_used = 0.0;
  double ram_used = 0.0;
  double disk_used = 0.0;

  bool operator==(const UsageRecord&) const = default;
};

inline constexpr std::size_t kTaskEventColumns = 13;
inline constexpr std::size_t kJobEventColumns = 8;

/// Single-line parsers; `line_no` is only used for error reporting.
TaskEvent parse_task_event_line(std::string_view line, std::size_t line_no);
JobEvent parse_job_event_line(std::string_view line, std::size_t line_no);
UsageRecord parse_usage_line(std::string_view line, std::size_t line_no);

/// Line-oriented byte source over a file (gzip detected transparently) or a
/// caller-owned stream. Holds one line buffer; memory does not grow with input.
class LineSource {
 public:
  explicit LineSource(const std::filesystem::path& path);
  explicit LineSource(std::istream& in);
  ~LineSource();
  LineSource(LineSource&&) noexcept;
  LineSource& operator=(LineSource&&) noexcept;

  /// Next line without its terminator; false at end of input.
  bool next_line(std::string& line);
  std::size_t line_number() const { return line_no_; }
  std::size_t buffer_capacity() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t line_no_ = 0;
};

/// Lazy, single-pass sequence of records parsed from a LineSource. Blank
/// lines are skipped; any other unparsable line throws MalformedRow.
template <typename Record, Record (*Parse)(std::string_view, std::size_t)>
class RecordStream {
 public:
  explicit RecordStream(LineSource source) : source_(std::move(source)) {}

  std::optional<Record> next() {
    while (source_.next_line(line_)) {
      if (line_.find_first_not_of(" \t") == std::string::npos) continue;
      return Parse(line_, source_.line_number());
    }
    return std::nullopt;
  }

  const LineSource& source() const { return source_; }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Record;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    explicit iterator(RecordStream* stream) : stream_(stream) { ++*this; }

    const Record& operator*() const { return *current_; }
    const Record* operator->() const { return &*current_; }
    iterator& operator++() {
      current_ = stream_->next();
      if (!current_) stream_ = nullptr;
      return *this;
    }
    void operator++(int) { ++*this; }
    bool operator==(const iterator& other) const { return stream_ == other.stream_; }

   private:
    RecordStream* stream_ = nullptr;
    std::optional<Record> current_;
  };

  iterator begin() { return iterator(this); }
  iterator end() { return iterator(); }

 private:
  LineSource source_;
  std::string line_;
};

using TaskEventStream = RecordStream<TaskEvent, parse_task_event_line>;
using JobEventStream = RecordStream<JobEvent, parse_job_event_line>;
using UsageStream = RecordStream<UsageRecord, parse_usage_line>;

inline TaskEventStream parse_task_events(LineSource source) { return TaskEventStream(std::move(source)); }
inline JobEventStream parse_job_events(LineSource source) { return JobEventStream(std::move(source)); }
inline UsageStream parse_usage(LineSource source) { return UsageStream(std::move(source)); }

/// Serializers emit the same layout the parsers accept; fields the parsers
/// discard (user, names, constraint) are written empty.
void write_task_event(std::ostream& out, const TaskEvent& event);
void write_job_event(std::ostream& out, const JobEvent& event);
void write_usage(std::ostream& out, const UsageRecord& record);

/// Deterministic order-stable subset of ceil(fraction * N) paths.
/// Throws InvalidFraction unless 0 < fraction <= 1, EmptyInput on an empty list.
std::vector<std::filesystem::path> sample_files(const std::vector<std::filesystem::path>& paths,
                                                double fraction, std::uint64_t seed);

/// Expands directories into their regular files (sorted by name); plain
/// paths are kept as given.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::filesystem::path>& inputs);

}  // namespace schedpred
