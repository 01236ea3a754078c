#include "schedpred/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "schedpred/errors.hpp"

namespace schedpred {

std::size_t ForestParams::resolved_features(std::size_t n_features) const {
  if (features_per_split) return std::clamp<std::size_t>(*features_per_split, 1, n_features);
  const auto m = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_features))));
  return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(n_features, 1));
}

nlohmann::json to_json(const ForestParams& p) {
  nlohmann::json j = {{"n_trees", p.n_trees},   {"bootstrap", p.bootstrap},
                      {"max_depth", p.max_depth}, {"min_leaf", p.min_leaf},
                      {"seed", p.seed},           {"features_per_split", nullptr}};
  if (p.features_per_split) j["features_per_split"] = *p.features_per_split;
  return j;
}

ForestParams forest_params_from_json(const nlohmann::json& j) {
  ForestParams p;
  for (const auto& [key, value] : j.items()) {
    if (key == "n_trees") p.n_trees = value.get<std::size_t>();
    else if (key == "bootstrap") p.bootstrap = value.get<bool>();
    else if (key == "max_depth") p.max_depth = value.get<int>();
    else if (key == "min_leaf") p.min_leaf = value.get<std::size_t>();
    else if (key == "seed") p.seed = value.get<std::uint64_t>();
    else if (key == "workers") p.workers = value.get<unsigned>();
    else if (key == "features_per_split") {
      if (!value.is_null()) p.features_per_split = value.get<std::size_t>();
    } else {
      throw ConfigError("unknown forest parameter: " + key);
    }
  }
  return p;
}

std::size_t Forest::fail_votes(std::span<const double> x) const {
  std::size_t votes = 0;
  for (const DecisionTree& t : trees_) votes += t.predict(x) == kFailClass ? 1 : 0;
  return votes;
}

int Forest::predict(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw ArityMismatch("forest expects " + std::to_string(n_features_) + " features, got " +
                        std::to_string(x.size()));
  }
  const std::size_t fail = fail_votes(x);
  return 2 * fail >= trees_.size() ? kFailClass : kFinishClass;
}

nlohmann::json Forest::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const DecisionTree& t : trees_) trees.push_back(t.to_json());
  return {{"n_features", n_features_}, {"trees", trees}};
}

Forest Forest::from_json(const nlohmann::json& j) {
  std::vector<DecisionTree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(DecisionTree::from_json(t));
  if (trees.empty()) throw SchemaMismatch("forest has no trees");
  return Forest(std::move(trees), j.at("n_features").get<std::size_t>());
}

Forest train_forest(const Dataset& data, const ForestParams& params) {
  if (data.empty()) throw EmptyDataset("train_forest: empty dataset");
  if (params.n_trees == 0) throw ConfigError("train_forest: n_trees must be at least 1");

  const SplitIndex index(data);
  const TreeParams tree_params{params.max_depth, params.min_leaf,
                               params.resolved_features(data.n_features())};
  const std::size_t n = data.size();

  std::vector<DecisionTree> trees(params.n_trees);
  auto build = [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, t));
    std::vector<double> weights(n, params.bootstrap ? 0.0 : 1.0);
    if (params.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) weights[rng.below(n)] += 1.0;
    }
    trees[t] = train_tree(data, index, weights, tree_params, rng);
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(params.workers, static_cast<unsigned>(params.n_trees)));
  if (workers == 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) build(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < params.n_trees; t = next++) {
          try {
            build(t);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  return Forest(std::move(trees), data.n_features());
}

std::vector<double> gini_importance(const Forest& forest) {
  std::vector<double> score(forest.n_features(), 0.0);
  for (const DecisionTree& t : forest.trees()) {
    for (const TreeNode& node : t.nodes()) {
      if (!node.is_leaf()) score[static_cast<std::size_t>(node.feature)] += node.impurity_decrease;
    }
  }
  if (forest.n_trees() > 0) {
    for (double& s : score) s /= static_cast<double>(forest.n_trees());
  }
  return score;
}

}  // namespace schedpred
