#pragma once

// Uniform handle over the supported learners, with self-describing JSON.

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "schedpred/dataset.hpp"
#include "schedpred/forest.hpp"
#include "schedpred/glm.hpp"
#include "schedpred/tree.hpp"

namespace schedpred {

using ModelSpec = std::variant<TreeParams, ForestParams, GlmParams>;

/// "tree", "forest" or "glm".
std::string model_kind(const ModelSpec& spec);
/// Default parameters for a kind name; throws ConfigError.
ModelSpec default_spec(const std::string& kind);

nlohmann::json to_json(const TreeParams& p);
TreeParams tree_params_from_json(const nlohmann::json& j);
/// {"kind": ..., "params": {...}}
nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

class Model {
 public:
  virtual ~Model() = default;

  const FeatureSchema& schema() const { return schema_; }
  const ModelSpec& spec() const { return spec_; }
  std::string kind() const { return model_kind(spec_); }

  /// Throws ArityMismatch.
  virtual int predict(std::span<const double> x) const = 0;
  /// Throws SchemaMismatch when the dataset schema differs.
  std::vector<int> predict_all(const Dataset& data) const;

  /// Non-null only for forests.
  virtual const Forest* forest() const { return nullptr; }

  nlohmann::json to_json() const;

 protected:
  Model(FeatureSchema schema, ModelSpec spec) : schema_(std::move(schema)), spec_(std::move(spec)) {}
  virtual nlohmann::json body_json() const = 0;

 private:
  FeatureSchema schema_;
  ModelSpec spec_;
};

/// Throws EmptyDataset and the learner's own errors.
std::unique_ptr<Model> train_model(const ModelSpec& spec, const Dataset& data);

/// Inverse of Model::to_json. Throws SchemaMismatch, ConfigError.
std::unique_ptr<Model> model_from_json(const nlohmann::json& j);

}  // namespace schedpred
