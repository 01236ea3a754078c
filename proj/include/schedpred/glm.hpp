#pragma once

// L2-regularized logistic regression fitted by gradient ascent.

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "schedpred/dataset.hpp"

namespace schedpred {

struct GlmParams {
  double l2 = 1e-4;
  std::size_t max_iter = 5000;
  double tol = 1e-6;
};

nlohmann::json to_json(const GlmParams& p);
GlmParams glm_params_from_json(const nlohmann::json& j);

/// Features are standardized with the stored mean/scale before the linear
/// predictor is applied. weights[0] is the intercept.
struct GlmModel {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<double> weights;
  std::size_t iterations = 0;
  bool converged = false;

  std::size_t n_features() const { return mean.size(); }
  /// P(fail class | x). Throws ArityMismatch.
  double probability(std::span<const double> x) const;
  /// Fail class when probability >= 0.5.
  int predict(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static GlmModel from_json(const nlohmann::json& j);

  bool operator==(const GlmModel&) const = default;
};

/// Mean Bernoulli log-likelihood minus (l2/2)*|w|^2 (intercept unpenalized),
/// over an already standardized design.
class LogisticObjective {
 public:
  LogisticObjective(std::vector<double> design, std::vector<int> labels, std::size_t n_features,
                    double l2);

  /// Standardizes `data` with the given mean/scale.
  static LogisticObjective from_dataset(const Dataset& data, std::span<const double> mean,
                                        std::span<const double> scale, double l2);

  std::size_t dimension() const { return n_features_ + 1; }
  double value(std::span<const double> w) const;
  std::vector<double> gradient(std::span<const double> w) const;

 private:
  double linear(std::size_t row, std::span<const double> w) const;

  std::vector<double> design_;
  std::vector<int> labels_;
  std::size_t n_features_;
  double l2_;
};

/// Throws EmptyDataset, ConfigError (negative l2, zero max_iter).
GlmModel train_logistic(const Dataset& data, const GlmParams& params);

}  // namespace schedpred
