#include "schedpred/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "schedpred/errors.hpp"

namespace schedpred {

// SplitIndex -------------------------------------------------------------------

SplitIndex::SplitIndex(const Dataset& data) : rows_(data.size()) {
  const std::size_t d = data.n_features();
  codes_.resize(d * rows_);
  distinct_.resize(d);
  std::vector<std::size_t> order(rows_);
  for (std::size_t f = 0; f < d; ++f) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return data.value(a, f) < data.value(b, f);
    });
    auto& values = distinct_[f];
    for (std::size_t i = 0; i < rows_; ++i) {
      const double v = data.value(order[i], f);
      if (values.empty() || values.back() != v) values.push_back(v);
      codes_[f * rows_ + order[i]] = static_cast<std::uint32_t>(values.size() - 1);
    }
  }
}

// Training ---------------------------------------------------------------------

namespace {

struct Bin {
  std::uint32_t code;
  double w0;
  double w1;
};

// Sum of child impurities weighted by child weight: n * gini(n).
inline double weighted_gini(double w0, double w1) {
  const double n = w0 + w1;
  if (n <= 0.0) return 0.0;
  return n - (w0 * w0 + w1 * w1) / n;
}

inline int majority(double w0, double w1) { return w1 >= w0 ? kFailClass : kFinishClass; }

struct SplitChoice {
  int feature = -1;
  std::uint32_t left_max_code = 0;  // rows with code <= this go left
  double threshold = 0.0;
  double score = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const SplitIndex& index, std::span<const double> weights,
              const TreeParams& params, Rng& rng)
      : data_(data), index_(index), weights_(weights), params_(params), rng_(rng) {
    std::size_t max_distinct = 0;
    for (std::size_t f = 0; f < index.n_features(); ++f) {
      max_distinct = std::max(max_distinct, index.distinct(f).size());
    }
    hist0_.assign(max_distinct, 0.0);
    hist1_.assign(max_distinct, 0.0);
    features_.resize(index.n_features());
  }

  std::vector<TreeNode> build() {
    for (std::size_t r = 0; r < index_.rows(); ++r) {
      if (weights_[r] > 0.0) rows_.push_back(static_cast<std::uint32_t>(r));
    }
    if (rows_.empty()) throw EmptyDataset("train_tree: no rows with positive weight");
    root_weight_ = 0.0;
    for (auto r : rows_) root_weight_ += weights_[r];
    grow(0, rows_.size(), 0);
    return std::move(nodes_);
  }

 private:
  std::int32_t grow(std::size_t begin, std::size_t end, int depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    double w0 = 0.0, w1 = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = rows_[i];
      (data_.label(r) == kFailClass ? w1 : w0) += weights_[r];
    }
    {
      TreeNode& node = nodes_[id];
      node.depth = depth;
      node.class_weight = {w0, w1};
      node.label = majority(w0, w1);
    }

    const double n = w0 + w1;
    const auto min_leaf = static_cast<double>(params_.min_leaf);
    if (w0 == 0.0 || w1 == 0.0 || depth >= params_.max_depth || n < 2.0 * min_leaf) return id;

    const double parent_score = weighted_gini(w0, w1);
    auto split = best_split(begin, end, w0, w1);
    if (split.feature < 0 || !(split.score < parent_score * (1.0 - 1e-12))) return id;

    const auto f = static_cast<std::size_t>(split.feature);
    auto mid = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                              rows_.begin() + static_cast<std::ptrdiff_t>(end),
                              [&](std::uint32_t r) { return index_.code(r, f) <= split.left_max_code; });
    const auto split_at = static_cast<std::size_t>(mid - rows_.begin());

    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    nodes_[id].impurity_decrease = (parent_score - split.score) / root_weight_;
    const std::int32_t left = grow(begin, split_at, depth + 1);
    const std::int32_t right = grow(split_at, end, depth + 1);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  SplitChoice best_split(std::size_t begin, std::size_t end, double w0, double w1) {
    const std::size_t d = index_.n_features();
    const std::size_t wanted = std::min(d, params_.features_per_split.value_or(d));
    std::iota(features_.begin(), features_.end(), 0);
    if (wanted < d) rng_.shuffle(std::span<std::size_t>(features_));

    SplitChoice best;
    std::size_t examined = 0;
    for (std::size_t k = 0; k < d && examined < wanted; ++k) {
      const std::size_t f = features_[k];
      collect_bins(f, begin, end);
      if (bins_.size() < 2) continue;  // constant in this node
      ++examined;
      scan(f, w0, w1, best);
    }
    return best;
  }

  void collect_bins(std::size_t f, std::size_t begin, std::size_t end) {
    bins_.clear();
    const std::size_t count = end - begin;
    const std::size_t distinct = index_.distinct(f).size();
    if (distinct <= 4 * count) {
      for (std::size_t i = begin; i < end; ++i) {
        const auto r = rows_[i];
        (data_.label(r) == kFailClass ? hist1_ : hist0_)[index_.code(r, f)] += weights_[r];
      }
      for (std::size_t c = 0; c < distinct; ++c) {
        if (hist0_[c] != 0.0 || hist1_[c] != 0.0) {
          bins_.push_back({static_cast<std::uint32_t>(c), hist0_[c], hist1_[c]});
          hist0_[c] = 0.0;
          hist1_[c] = 0.0;
        }
      }
    } else {
      sorted_.clear();
      for (std::size_t i = begin; i < end; ++i) {
        const auto r = rows_[i];
        const bool fail = data_.label(r) == kFailClass;
        sorted_.push_back({index_.code(r, f), fail ? 0.0 : weights_[r], fail ? weights_[r] : 0.0});
      }
      std::sort(sorted_.begin(), sorted_.end(),
                [](const Bin& a, const Bin& b) { return a.code < b.code; });
      for (const Bin& b : sorted_) {
        if (!bins_.empty() && bins_.back().code == b.code) {
          bins_.back().w0 += b.w0;
          bins_.back().w1 += b.w1;
        } else {
          bins_.push_back(b);
        }
      }
    }
  }

  void scan(std::size_t f, double w0, double w1, SplitChoice& best) const {
    const auto min_leaf = static_cast<double>(params_.min_leaf);
    double l0 = 0.0, l1 = 0.0;
    for (std::size_t b = 0; b + 1 < bins_.size(); ++b) {
      l0 += bins_[b].w0;
      l1 += bins_[b].w1;
      const double r0 = w0 - l0;
      const double r1 = w1 - l1;
      if (l0 + l1 < min_leaf) continue;
      if (r0 + r1 < min_leaf) break;
      const double score = weighted_gini(l0, l1) + weighted_gini(r0, r1);
      const bool better = best.feature < 0 || score < best.score ||
                          (score == best.score && static_cast<int>(f) < best.feature);
      if (!better) continue;
      const auto values = index_.distinct(f);
      const double lo = values[bins_[b].code];
      const double hi = values[bins_[b + 1].code];
      double threshold = lo + (hi - lo) / 2.0;
      if (!(threshold > lo)) threshold = hi;
      best = {static_cast<int>(f), bins_[b].code, threshold, score};
    }
  }

  const Dataset& data_;
  const SplitIndex& index_;
  std::span<const double> weights_;
  const TreeParams& params_;
  Rng& rng_;

  std::vector<std::uint32_t> rows_;
  std::vector<TreeNode> nodes_;
  std::vector<double> hist0_, hist1_;
  std::vector<Bin> bins_, sorted_;
  std::vector<std::size_t> features_;
  double root_weight_ = 0.0;
};

}  // namespace

DecisionTree train_tree(const Dataset& data, const SplitIndex& index,
                        std::span<const double> weights, const TreeParams& params, Rng& rng) {
  if (data.empty()) throw EmptyDataset("train_tree: empty dataset");
  if (weights.size() != data.size()) throw LengthMismatch("train_tree: weight vector length");
  TreeBuilder builder(data, index, weights, params, rng);
  return DecisionTree(builder.build(), data.n_features());
}

DecisionTree train_tree(const Dataset& data, const TreeParams& params, std::uint64_t seed) {
  if (data.empty()) throw EmptyDataset("train_tree: empty dataset");
  const SplitIndex index(data);
  const std::vector<double> weights(data.size(), 1.0);
  Rng rng(seed);
  return train_tree(data, index, weights, params, rng);
}

// DecisionTree -----------------------------------------------------------------

std::size_t DecisionTree::leaf_of(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw ArityMismatch("tree expects " + std::to_string(n_features_) + " features, got " +
                        std::to_string(x.size()));
  }
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const TreeNode& node = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] < node.threshold
                                     ? node.left
                                     : node.right);
  }
  return i;
}

int DecisionTree::predict(std::span<const double> x) const { return nodes_[leaf_of(x)].label; }

int DecisionTree::depth() const {
  int d = 0;
  for (const TreeNode& n : nodes_) d = std::max(d, n.depth);
  return d;
}

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const TreeNode& n : nodes_) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"depth", n.depth},
                     {"label", n.label},
                     {"class_weight", n.class_weight},
                     {"impurity_decrease", n.impurity_decrease}});
  }
  return {{"n_features", n_features_}, {"nodes", nodes}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.feature = n.at("feature").get<int>();
    node.threshold = n.at("threshold").get<double>();
    node.left = n.at("left").get<std::int32_t>();
    node.right = n.at("right").get<std::int32_t>();
    node.depth = n.at("depth").get<int>();
    node.label = n.at("label").get<int>();
    node.class_weight = n.at("class_weight").get<std::array<double, 2>>();
    node.impurity_decrease = n.at("impurity_decrease").get<double>();
    nodes.push_back(node);
  }
  if (nodes.empty()) throw SchemaMismatch("tree has no nodes");
  return DecisionTree(std::move(nodes), j.at("n_features").get<std::size_t>());
}

}  // namespace schedpred
