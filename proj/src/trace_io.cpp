#include "schedpred/trace_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "schedpred/rng.hpp"

namespace schedpred {

namespace {

constexpr std::size_t kMaxColumns = 24;

struct Fields {
  std::array<std::string_view, kMaxColumns> items;
  std::size_t count = 0;
};

Fields split_fields(std::string_view line, std::size_t line_no) {
  Fields f;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (f.count == kMaxColumns) throw MalformedRow(line_no, "arity");
    if (comma == std::string_view::npos) {
      f.items[f.count++] = line.substr(start);
      break;
    }
    f.items[f.count++] = line.substr(start, comma - start);
    start = comma + 1;
  }
  return f;
}

template <typename T>
T parse_int(std::string_view text, std::size_t line_no, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw MalformedRow(line_no, std::string("unparsable ") + what);
  }
  return value;
}

template <typename T>
std::optional<T> parse_optional_int(std::string_view text, std::size_t line_no, const char* what) {
  if (text.empty()) return std::nullopt;
  return parse_int<T>(text, line_no, what);
}

std::optional<double> parse_optional_double(std::string_view text, std::size_t line_no,
                                            const char* what) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw MalformedRow(line_no, std::string("unparsable ") + what);
  }
  if (value < 0.0) throw MalformedRow(line_no, std::string("negative ") + what);
  return value;
}

std::int64_t parse_timestamp(std::string_view text, std::size_t line_no) {
  const auto ts = parse_int<std::int64_t>(text, line_no, "timestamp");
  if (ts < 0) throw MalformedRow(line_no, "negative timestamp");
  return ts;
}

bool parse_missing(std::string_view text, std::size_t line_no) {
  const auto v = parse_optional_int<long>(text, line_no, "missing info");
  return v.value_or(0) != 0;
}

EventType parse_event(std::string_view text, std::size_t line_no) {
  const auto code = parse_int<long>(text, line_no, "event type");
  auto event = event_type_from_code(code);
  if (!event) throw MalformedRow(line_no, "unknown event code " + std::to_string(code));
  return *event;
}

int parse_bounded(std::string_view text, std::size_t line_no, const char* what, int hi) {
  if (text.empty()) return 0;
  const auto v = parse_int<int>(text, line_no, what);
  if (v < 0 || v > hi) throw MalformedRow(line_no, std::string(what) + " out of range");
  return v;
}

void put_double(std::ostream& out, double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.write(buf.data(), ptr - buf.data());
}

void put_optional(std::ostream& out, const std::optional<double>& v) {
  if (v) put_double(out, *v);
}

}  // namespace

TaskEvent parse_task_event_line(std::string_view line, std::size_t line_no) {
  const Fields f = split_fields(line, line_no);
  if (f.count != kTaskEventColumns) throw MalformedRow(line_no, "arity");
  TaskEvent e;
  e.timestamp = parse_timestamp(f.items[0], line_no);
  e.missing_info = parse_missing(f.items[1], line_no);
  e.job_id = parse_int<std::uint64_t>(f.items[2], line_no, "job id");
  e.task_index = parse_int<std::uint64_t>(f.items[3], line_no, "task index");
  e.machine_id = parse_optional_int<std::uint64_t>(f.items[4], line_no, "machine id");
  e.event = parse_event(f.items[5], line_no);
  // f.items[6]: anonymized user, discarded.
  e.scheduling_class = parse_bounded(f.items[7], line_no, "scheduling class", 3);
  e.priority = parse_bounded(f.items[8], line_no, "priority", 11);
  e.cpu_request = parse_optional_double(f.items[9], line_no, "cpu request");
  e.ram_request = parse_optional_double(f.items[10], line_no, "ram request");
  e.disk_request = parse_optional_double(f.items[11], line_no, "disk request");
  // f.items[12]: different-machine constraint, discarded.
  return e;
}

JobEvent parse_job_event_line(std::string_view line, std::size_t line_no) {
  const Fields f = split_fields(line, line_no);
  if (f.count != kJobEventColumns) throw MalformedRow(line_no, "arity");
  JobEvent e;
  e.timestamp = parse_timestamp(f.items[0], line_no);
  e.missing_info = parse_missing(f.items[1], line_no);
  e.job_id = parse_int<std::uint64_t>(f.items[2], line_no, "job id");
  e.event = parse_event(f.items[3], line_no);
  e.scheduling_class = parse_bounded(f.items[5], line_no, "scheduling class", 3);
  return e;
}

UsageRecord parse_usage_line(std::string_view line, std::size_t line_no) {
  const Fields f = split_fields(line, line_no);
  if (f.count != 19 && f.count != 20) throw MalformedRow(line_no, "arity");
  UsageRecord r;
  r.window_start = parse_timestamp(f.items[0], line_no);
  r.window_end = parse_timestamp(f.items[1], line_no);
  if (r.window_start >= r.window_end) throw MalformedRow(line_no, "empty usage window");
  r.job_id = parse_int<std::uint64_t>(f.items[2], line_no, "job id");
  r.task_index = parse_int<std::uint64_t>(f.items[3], line_no, "task index");
  r.cpu_used = parse_optional_double(f.items[5], line_no, "cpu usage").value_or(0.0);
  r.ram_used = parse_optional_double(f.items[6], line_no, "memory usage").value_or(0.0);
  r.disk_used = parse_optional_double(f.items[12], line_no, "disk usage").value_or(0.0);
  return r;
}

void write_task_event(std::ostream& out, const TaskEvent& e) {
  out << e.timestamp << ',' << (e.missing_info ? "1" : "") << ',' << e.job_id << ','
      << e.task_index << ',';
  if (e.machine_id) out << *e.machine_id;
  out << ',' << static_cast<int>(e.event) << ",," << e.scheduling_class << ',' << e.priority
      << ',';
  put_optional(out, e.cpu_request);
  out << ',';
  put_optional(out, e.ram_request);
  out << ',';
  put_optional(out, e.disk_request);
  out << ",\n";
}

void write_job_event(std::ostream& out, const JobEvent& e) {
  out << e.timestamp << ',' << (e.missing_info ? "1" : "") << ',' << e.job_id << ','
      << static_cast<int>(e.event) << ",," << e.scheduling_class << ",,\n";
}

void write_usage(std::ostream& out, const UsageRecord& r) {
  out << r.window_start << ',' << r.window_end << ',' << r.job_id << ',' << r.task_index << ",,";
  put_double(out, r.cpu_used);
  out << ',';
  put_double(out, r.ram_used);
  out << ",,,,,,";
  put_double(out, r.disk_used);
  out << ",,,,,,,\n";
}

// LineSource ---------------------------------------------------------------

struct LineSource::Impl {
  gzFile gz = nullptr;
  std::istream* stream = nullptr;
  std::string chunk = std::string(64 * 1024, '\0');

  ~Impl() {
    if (gz) gzclose(gz);
  }
};

LineSource::LineSource(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()) {
  impl_->gz = gzopen(path.c_str(), "rb");
  if (!impl_->gz) throw Error("cannot open " + path.string());
  gzbuffer(impl_->gz, 256 * 1024);
}

LineSource::LineSource(std::istream& in) : impl_(std::make_unique<Impl>()) {
  impl_->stream = &in;
}

LineSource::~LineSource() = default;
LineSource::LineSource(LineSource&&) noexcept = default;
LineSource& LineSource::operator=(LineSource&&) noexcept = default;

bool LineSource::next_line(std::string& line) {
  line.clear();
  if (impl_->stream) {
    if (!std::getline(*impl_->stream, line)) return false;
  } else {
    bool got_any = false;
    while (true) {
      char* r = gzgets(impl_->gz, impl_->chunk.data(), static_cast<int>(impl_->chunk.size()));
      if (!r) {
        int err = 0;
        const char* msg = gzerror(impl_->gz, &err);
        if (err != Z_OK && err != Z_STREAM_END) throw Error(std::string("read error: ") + msg);
        break;
      }
      got_any = true;
      std::string_view piece(impl_->chunk.data());
      if (!piece.empty() && piece.back() == '\n') {
        piece.remove_suffix(1);
        line.append(piece);
        break;
      }
      line.append(piece);
    }
    if (!got_any) return false;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_no_;
  return true;
}

std::size_t LineSource::buffer_capacity() const { return impl_->chunk.capacity(); }

// File selection -------------------------------------------------------------

std::vector<std::filesystem::path> sample_files(const std::vector<std::filesystem::path>& paths,
                                                double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidFraction("sample fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  if (paths.empty()) throw EmptyInput("sample_files: no paths");
  const std::size_t n = paths.size();
  // Guard against products such as 0.02 * 500 landing a hair above 10.
  auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);
  if (k == n) return paths;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(order[i], order[i + rng.below(n - i)]);
  }
  order.resize(k);
  std::sort(order.begin(), order.end());
  std::vector<std::filesystem::path> out;
  out.reserve(k);
  for (std::size_t i : order) out.push_back(paths[i]);
  return out;
}

std::vector<std::filesystem::path> expand_inputs(const std::vector<std::filesystem::path>& inputs) {
  std::vector<std::filesystem::path> out;
  for (const auto& p : inputs) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(p)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace schedpred
