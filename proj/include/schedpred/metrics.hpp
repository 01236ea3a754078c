#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <nlohmann/json.hpp>

namespace schedpred {

/// Confusion counts with the fail class as positive. Ratios with a zero
/// denominator are absent.
struct Metrics {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;

  std::size_t total() const { return tp + tn + fp + fn; }
  bool operator==(const Metrics&) const = default;
};

/// Throws LengthMismatch on unequal lengths, EmptyInput on empty vectors.
Metrics confusion_metrics(std::span<const int> predicted, std::span<const int> actual);

/// Ratios recomputed from the four counts.
Metrics metrics_from_counts(std::size_t tp, std::size_t tn, std::size_t fp, std::size_t fn);

nlohmann::json to_json(const Metrics& m);

}  // namespace schedpred
