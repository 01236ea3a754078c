#include "schedpred/model.hpp"

#include "schedpred/errors.hpp"

namespace schedpred {

namespace {

class TreeModel final : public Model {
 public:
  TreeModel(FeatureSchema schema, TreeParams params, DecisionTree tree)
      : Model(std::move(schema), params), tree_(std::move(tree)) {}
  int predict(std::span<const double> x) const override { return tree_.predict(x); }

 protected:
  nlohmann::json body_json() const override { return tree_.to_json(); }

 private:
  DecisionTree tree_;
};

class ForestModel final : public Model {
 public:
  ForestModel(FeatureSchema schema, ForestParams params, Forest forest)
      : Model(std::move(schema), params), forest_(std::move(forest)) {}
  int predict(std::span<const double> x) const override { return forest_.predict(x); }
  const Forest* forest() const override { return &forest_; }

 protected:
  nlohmann::json body_json() const override { return forest_.to_json(); }

 private:
  Forest forest_;
};

class GlmWrapper final : public Model {
 public:
  GlmWrapper(FeatureSchema schema, GlmParams params, GlmModel glm)
      : Model(std::move(schema), params), glm_(std::move(glm)) {}
  int predict(std::span<const double> x) const override { return glm_.predict(x); }

 protected:
  nlohmann::json body_json() const override { return glm_.to_json(); }

 private:
  GlmModel glm_;
};

}  // namespace

std::string model_kind(const ModelSpec& spec) {
  switch (spec.index()) {
    case 0: return "tree";
    case 1: return "forest";
    default: return "glm";
  }
}

ModelSpec default_spec(const std::string& kind) {
  if (kind == "tree") return TreeParams{};
  if (kind == "forest") return ForestParams{};
  if (kind == "glm") return GlmParams{};
  throw ConfigError("unknown model kind: " + kind);
}

nlohmann::json to_json(const TreeParams& p) {
  nlohmann::json j = {
      {"max_depth", p.max_depth}, {"min_leaf", p.min_leaf}, {"features_per_split", nullptr}};
  if (p.features_per_split) j["features_per_split"] = *p.features_per_split;
  return j;
}

TreeParams tree_params_from_json(const nlohmann::json& j) {
  TreeParams p;
  for (const auto& [key, value] : j.items()) {
    if (key == "max_depth") p.max_depth = value.get<int>();
    else if (key == "min_leaf") p.min_leaf = value.get<std::size_t>();
    else if (key == "features_per_split") {
      if (!value.is_null()) p.features_per_split = value.get<std::size_t>();
    } else {
      throw ConfigError("unknown tree parameter: " + key);
    }
  }
  return p;
}

nlohmann::json to_json(const ModelSpec& spec) {
  const nlohmann::json params = std::visit([](const auto& p) { return to_json(p); }, spec);
  return {{"kind", model_kind(spec)}, {"params", params}};
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    const nlohmann::json params = j.contains("params") ? j.at("params") : nlohmann::json::object();
    if (kind == "tree") return tree_params_from_json(params);
    if (kind == "forest") return forest_params_from_json(params);
    if (kind == "glm") return glm_params_from_json(params);
    throw ConfigError("unknown model kind: " + kind);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model spec: ") + e.what());
  }
}

std::vector<int> Model::predict_all(const Dataset& data) const {
  if (!(data.schema() == schema_)) throw SchemaMismatch("dataset schema differs from the model's");
  std::vector<int> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = predict(data.row(i));
  return out;
}

nlohmann::json Model::to_json() const {
  nlohmann::json j = schedpred::to_json(spec_);
  j["schema"] = schedpred::to_json(schema_);
  j["model"] = body_json();
  return j;
}

std::unique_ptr<Model> train_model(const ModelSpec& spec, const Dataset& data) {
  if (data.empty()) throw EmptyDataset("train_model: empty dataset");
  if (const auto* p = std::get_if<TreeParams>(&spec)) {
    return std::make_unique<TreeModel>(data.schema(), *p, train_tree(data, *p));
  }
  if (const auto* p = std::get_if<ForestParams>(&spec)) {
    return std::make_unique<ForestModel>(data.schema(), *p, train_forest(data, *p));
  }
  const auto& p = std::get<GlmParams>(spec);
  return std::make_unique<GlmWrapper>(data.schema(), p, train_logistic(data, p));
}

namespace {

std::unique_ptr<Model> parse_model(const nlohmann::json& j) {
  const ModelSpec spec = model_spec_from_json(j);
  FeatureSchema schema = feature_schema_from_json(j.at("schema"));
  const auto& body = j.at("model");
  auto check_arity = [&](std::size_t n) {
    if (n != schema.size()) throw SchemaMismatch("model arity differs from its schema");
  };
  if (const auto* p = std::get_if<TreeParams>(&spec)) {
    auto tree = DecisionTree::from_json(body);
    check_arity(tree.n_features());
    return std::make_unique<TreeModel>(std::move(schema), *p, std::move(tree));
  }
  if (const auto* p = std::get_if<ForestParams>(&spec)) {
    auto forest = Forest::from_json(body);
    check_arity(forest.n_features());
    return std::make_unique<ForestModel>(std::move(schema), *p, std::move(forest));
  }
  auto glm = GlmModel::from_json(body);
  check_arity(glm.n_features());
  return std::make_unique<GlmWrapper>(std::move(schema), std::get<GlmParams>(spec), std::move(glm));
}

}  // namespace

std::unique_ptr<Model> model_from_json(const nlohmann::json& j) {
  try {
    return parse_model(j);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaMismatch(std::string("model file: ") + e.what());
  }
}

}  // namespace schedpred
