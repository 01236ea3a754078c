#pragma once

// Bagged ensemble of CART trees with per-node feature subsampling.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "schedpred/tree.hpp"

namespace schedpred {

struct ForestParams {
  std::size_t n_trees = 100;
  /// Features drawn per split; nullopt means floor(sqrt(#features)).
  std::optional<std::size_t> features_per_split;
  bool bootstrap = true;
  int max_depth = 12;
  std::size_t min_leaf = 5;
  std::uint64_t seed = 1;
  /// Parallel training threads. Does not affect the trained forest.
  unsigned workers = 1;

  /// Effective per-split feature count for `n_features` columns.
  std::size_t resolved_features(std::size_t n_features) const;
};

nlohmann::json to_json(const ForestParams& p);
ForestParams forest_params_from_json(const nlohmann::json& j);

class Forest {
 public:
  Forest() = default;
  Forest(std::vector<DecisionTree> trees, std::size_t n_features)
      : trees_(std::move(trees)), n_features_(n_features) {}

  /// Majority vote; a tie goes to the fail class. Throws ArityMismatch.
  int predict(std::span<const double> x) const;
  /// Number of trees voting for the fail class.
  std::size_t fail_votes(std::span<const double> x) const;

  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::size_t n_trees() const { return trees_.size(); }
  std::size_t n_features() const { return n_features_; }

  nlohmann::json to_json() const;
  static Forest from_json(const nlohmann::json& j);

  bool operator==(const Forest&) const = default;

 private:
  std::vector<DecisionTree> trees_;
  std::size_t n_features_ = 0;
};

/// Tree t draws from the stream derive_seed(params.seed, t), so the result is
/// independent of params.workers. Throws EmptyDataset, ConfigError.
Forest train_forest(const Dataset& data, const ForestParams& params);

/// Mean decrease in Gini impurity per feature, averaged over trees.
std::vector<double> gini_importance(const Forest& forest);

}  // namespace schedpred
