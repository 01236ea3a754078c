#include "schedpred/dataset.hpp"

#include <cmath>

#include "schedpred/errors.hpp"

namespace schedpred {

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

nlohmann::json to_json(const FeatureSchema& schema) { return schema.names; }

FeatureSchema feature_schema_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw SchemaMismatch("feature schema must be an array of names");
  FeatureSchema s;
  for (const auto& n : j) s.names.push_back(n.get<std::string>());
  return s;
}

FeatureSchema default_task_schema() {
  return {{"scheduling_class", "priority", "requested_cpu", "requested_ram", "requested_disk",
           "prev_finished", "prev_killed", "prev_failed", "prev_evicted", "prev_lost",
           "prev_unscheduled", "reschedule_count"}};
}

FeatureSchema default_job_schema() {
  return {{"scheduling_class", "n_finished", "n_killed", "n_failed", "n_evicted", "n_lost",
           "n_unscheduled", "total_tasks"}};
}

void Dataset::add(std::span<const double> features, int label) {
  if (features.size() != schema_.size()) {
    throw ArityMismatch("dataset row has " + std::to_string(features.size()) +
                        " values, schema has " + std::to_string(schema_.size()));
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw SchemaMismatch("non-finite feature value");
  }
  if (label != kFailClass && label != kFinishClass) throw SchemaMismatch("label must be 0 or 1");
  values_.insert(values_.end(), features.begin(), features.end());
  labels_.push_back(label);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out(schema_);
  out.values_.reserve(indices.size() * schema_.size());
  out.labels_.reserve(indices.size());
  for (std::size_t i : indices) {
    auto r = row(i);
    out.values_.insert(out.values_.end(), r.begin(), r.end());
    out.labels_.push_back(labels_[i]);
  }
  return out;
}

double task_feature(const TaskAttributes& t, std::string_view name) {
  if (name == "waiting_time") return static_cast<double>(t.waiting_time);
  if (name == "service_time") return static_cast<double>(t.service_time);
  if (name == "scheduling_class") return t.scheduling_class;
  if (name == "priority") return t.priority;
  if (name == "requested_cpu") return t.requested_cpu;
  if (name == "requested_ram") return t.requested_ram;
  if (name == "requested_disk") return t.requested_disk;
  if (name == "used_cpu") return t.used_cpu;
  if (name == "used_ram") return t.used_ram;
  if (name == "used_disk") return t.used_disk;
  if (name == "prev_finished") return static_cast<double>(t.prev_finished);
  if (name == "prev_killed") return static_cast<double>(t.prev_killed);
  if (name == "prev_failed") return static_cast<double>(t.prev_failed);
  if (name == "prev_evicted") return static_cast<double>(t.prev_evicted);
  if (name == "prev_lost") return static_cast<double>(t.prev_lost);
  if (name == "prev_unscheduled") return static_cast<double>(t.prev_unscheduled);
  if (name == "reschedule_count") return static_cast<double>(t.reschedule_count);
  throw SchemaMismatch("unknown task feature: " + std::string(name));
}

double job_feature(const JobAttributes& j, std::string_view name) {
  if (name == "waiting_time") return static_cast<double>(j.waiting_time);
  if (name == "service_time") return static_cast<double>(j.service_time);
  if (name == "scheduling_class") return j.scheduling_class;
  if (name == "n_finished") return static_cast<double>(j.n_finished);
  if (name == "n_killed") return static_cast<double>(j.n_killed);
  if (name == "n_failed") return static_cast<double>(j.n_failed);
  if (name == "n_evicted") return static_cast<double>(j.n_evicted);
  if (name == "n_lost") return static_cast<double>(j.n_lost);
  if (name == "n_unscheduled") return static_cast<double>(j.n_unscheduled);
  if (name == "total_tasks") return static_cast<double>(j.total_tasks);
  throw SchemaMismatch("unknown job feature: " + std::string(name));
}

void task_features(const TaskAttributes& t, const FeatureSchema& schema, std::span<double> out) {
  for (std::size_t f = 0; f < schema.size(); ++f) out[f] = task_feature(t, schema.names[f]);
}

Dataset make_task_dataset(std::span<const TaskAttributes> tasks, const FeatureSchema& schema) {
  Dataset d(schema);
  std::vector<double> row(schema.size());
  for (const TaskAttributes& t : tasks) {
    task_features(t, schema, row);
    d.add(row, label_of(t.final_status));
  }
  return d;
}

Dataset make_job_dataset(std::span<const JobAttributes> jobs, const FeatureSchema& schema) {
  Dataset d(schema);
  std::vector<double> row(schema.size());
  for (const JobAttributes& j : jobs) {
    for (std::size_t f = 0; f < schema.size(); ++f) row[f] = job_feature(j, schema.names[f]);
    d.add(row, label_of(j.final_status));
  }
  return d;
}

}  // namespace schedpred
