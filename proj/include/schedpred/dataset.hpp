#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "schedpred/attributes.hpp"

namespace schedpred {

/// Binary outcome: anything other than Finished is the positive class.
inline constexpr int kFailClass = 1;
inline constexpr int kFinishClass = 0;

constexpr int label_of(FinalStatus status) {
  return status == FinalStatus::Finished ? kFinishClass : kFailClass;
}

/// Ordered feature names; models and datasets agree on it by equality.
struct FeatureSchema {
  std::vector<std::string> names;

  std::size_t size() const { return names.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  bool operator==(const FeatureSchema&) const = default;
};

nlohmann::json to_json(const FeatureSchema& schema);
FeatureSchema feature_schema_from_json(const nlohmann::json& j);

/// Task features known before a task runs: placement inputs plus the
/// outcomes of earlier tasks in the same job.
FeatureSchema default_task_schema();
/// Job features: per-status task counts and size.
FeatureSchema default_job_schema();

/// Row-major feature matrix with binary labels.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(FeatureSchema schema) : schema_(std::move(schema)) {}

  const FeatureSchema& schema() const { return schema_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t n_features() const { return schema_.size(); }
  bool empty() const { return labels_.empty(); }

  /// Throws ArityMismatch on wrong length, SchemaMismatch on a non-finite value
  /// or a label outside {0, 1}.
  void add(std::span<const double> features, int label);

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * schema_.size(), schema_.size()};
  }
  double value(std::size_t i, std::size_t f) const { return values_[i * schema_.size() + f]; }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const int> labels() const { return labels_; }

  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  FeatureSchema schema_;
  std::vector<double> values_;
  std::vector<int> labels_;
};

/// Value of a named TaskAttributes field; throws SchemaMismatch for unknown names.
double task_feature(const TaskAttributes& t, std::string_view name);
double job_feature(const JobAttributes& j, std::string_view name);

void task_features(const TaskAttributes& t, const FeatureSchema& schema, std::span<double> out);

Dataset make_task_dataset(std::span<const TaskAttributes> tasks, const FeatureSchema& schema);
Dataset make_job_dataset(std::span<const JobAttributes> jobs, const FeatureSchema& schema);

}  // namespace schedpred
