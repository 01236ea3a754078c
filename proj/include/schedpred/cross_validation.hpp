#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "schedpred/metrics.hpp"
#include "schedpred/model.hpp"

namespace schedpred {

/// Seeded shuffle of 0..n-1 cut into k contiguous folds whose sizes differ by
/// at most one. Throws TooFewSamples unless 2 <= k <= n.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

struct CvResult {
  std::vector<Metrics> folds;
  /// Counts summed over folds.
  Metrics pooled;
  /// Per-fold means; precision/recall average only the folds where defined.
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
};

CvResult cross_validate(const Dataset& data, std::size_t k, const ModelSpec& spec,
                        std::uint64_t seed);

nlohmann::json to_json(const CvResult& r);

}  // namespace schedpred
