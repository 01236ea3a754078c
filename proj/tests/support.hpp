#pragma once

// Fixtures shared by the unit tests and the acceptance runner.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "schedpred/dataset.hpp"
#include "schedpred/rng.hpp"

namespace schedpred::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("schedpred_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Failure rule learned from the task attributes: a killed predecessor, or a
/// low-priority task with a failed or evicted predecessor.
inline int history_rule_label(double priority, double prev_killed, double prev_failed, double prev_evicted) {
  if (prev_killed > 0.5) return kFailClass;
  if (priority < 1.5 && (prev_evicted > 0.5 || prev_failed > 0.5)) return kFailClass;
  return kFinishClass;
}

inline FeatureSchema history_rule_schema() {
  return {{"priority", "prev_finished", "prev_killed", "prev_failed", "prev_evicted"}};
}

/// Noise-free history-rule data: random priorities 0..11 and history counts 0..3.
inline Dataset history_rule_dataset(std::size_t n, std::uint64_t seed) {
  Dataset d(history_rule_schema());
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double priority = static_cast<double>(rng.range(0, 11));
    const double fin = static_cast<double>(rng.range(0, 3));
    const double killed = rng.bernoulli(0.2) ? static_cast<double>(rng.range(1, 3)) : 0.0;
    const double failed = rng.bernoulli(0.3) ? static_cast<double>(rng.range(1, 3)) : 0.0;
    const double evicted = rng.bernoulli(0.3) ? static_cast<double>(rng.range(1, 3)) : 0.0;
    const double row[] = {priority, fin, killed, failed, evicted};
    d.add(row, history_rule_label(priority, killed, failed, evicted));
  }
  return d;
}

}  // namespace schedpred::testing
