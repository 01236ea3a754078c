#pragma once

// CART classification tree grown greedily on Gini impurity.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "schedpred/dataset.hpp"
#include "schedpred/rng.hpp"

namespace schedpred {

struct TreeParams {
  int max_depth = 12;
  std::size_t min_leaf = 5;
  /// Features examined per split; nullopt examines all of them.
  std::optional<std::size_t> features_per_split;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // value < threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  int depth = 0;
  int label = kFinishClass;
  std::array<double, 2> class_weight{};  // training weight per class reaching the node
  /// (node weight / root weight) * (gini(node) - weighted child gini); zero at leaves.
  double impurity_decrease = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features)
      : nodes_(std::move(nodes)), n_features_(n_features) {}

  /// Throws ArityMismatch when x does not have n_features() values.
  int predict(std::span<const double> x) const;
  /// Index of the leaf reached by x.
  std::size_t leaf_of(std::span<const double> x) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t n_features() const { return n_features_; }
  int depth() const;

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& j);

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
};

/// Per-feature ranks of the distinct values of a dataset. Built once and
/// shared (read-only) by every tree trained on that dataset.
class SplitIndex {
 public:
  explicit SplitIndex(const Dataset& data);

  std::size_t rows() const { return rows_; }
  std::size_t n_features() const { return distinct_.size(); }
  std::uint32_t code(std::size_t row, std::size_t feature) const {
    return codes_[feature * rows_ + row];
  }
  std::span<const double> distinct(std::size_t feature) const { return distinct_[feature]; }

 private:
  std::size_t rows_ = 0;
  std::vector<std::uint32_t> codes_;
  std::vector<std::vector<double>> distinct_;
};

/// Trains on every row with unit weight. `seed` only matters when
/// features_per_split restricts the split search. Throws EmptyDataset.
DecisionTree train_tree(const Dataset& data, const TreeParams& params, std::uint64_t seed = 0);

/// Trains on row weights (bootstrap multiplicities); zero-weight rows are
/// excluded. Candidate thresholds are midpoints between consecutive distinct
/// values present in a node; ties in split quality go to the lowest feature
/// index, then the lowest threshold.
DecisionTree train_tree(const Dataset& data, const SplitIndex& index,
                        std::span<const double> weights, const TreeParams& params, Rng& rng);

}  // namespace schedpred
