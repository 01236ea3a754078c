#include <gtest/gtest.h>

#include <cmath>

#include "schedpred/glm.hpp"
#include "support.hpp"

using namespace schedpred;

namespace {

Dataset noisy(std::size_t n, std::uint64_t seed) {
  Dataset d(FeatureSchema{{"a", "b", "c"}});
  schedpred::Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double row[] = {rng.normal(), rng.uniform(0, 10), static_cast<double>(rng.range(0, 3))};
    const double z = 1.5 * row[0] - 0.3 * row[1] + 0.8 * row[2] + 0.5;
    d.add(row, rng.bernoulli(1.0 / (1.0 + std::exp(-z))) ? kFailClass : kFinishClass);
  }
  return d;
}

}  // namespace

TEST(Glm, SeparableOneDimensional) {
  Dataset d(FeatureSchema{{"x"}});
  for (int i = -10; i <= 10; ++i) {
    if (i == 0) continue;
    const double x[] = {static_cast<double>(i)};
    d.add(x, i > 0 ? kFailClass : kFinishClass);
  }
  const auto m = train_logistic(d, GlmParams{});
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(m.predict(d.row(i)), d.label(i));
}

TEST(Glm, GradientVanishesAtOptimum) {
  const auto d = noisy(400, 3);
  GlmParams p;
  const auto m = train_logistic(d, p);
  ASSERT_TRUE(m.converged);
  const auto obj = LogisticObjective::from_dataset(d, m.mean, m.scale, p.l2);
  for (double g : obj.gradient(m.weights)) EXPECT_LT(std::abs(g), p.tol);
}

TEST(Glm, GradientMatchesFiniteDifferences) {
  const auto d = noisy(200, 5);
  std::vector<double> mean(3, 0.0), scale(3, 1.0);
  const auto obj = LogisticObjective::from_dataset(d, mean, scale, 0.01);
  schedpred::Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> w(obj.dimension());
    for (double& v : w) v = rng.normal() * 0.5;
    const auto g = obj.gradient(w);
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double h = 1e-5;
      auto plus = w, minus = w;
      plus[k] += h;
      minus[k] -= h;
      const double fd = (obj.value(plus) - obj.value(minus)) / (2.0 * h);
      EXPECT_NEAR(g[k], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Glm, StandardizationHandlesConstantColumn) {
  Dataset d(FeatureSchema{{"x", "constant"}});
  for (int i = 0; i < 50; ++i) {
    const double row[] = {static_cast<double>(i), 4.0};
    d.add(row, i >= 25 ? kFailClass : kFinishClass);
  }
  const auto m = train_logistic(d, GlmParams{});
  EXPECT_DOUBLE_EQ(m.scale[1], 1.0);
  for (double w : m.weights) EXPECT_TRUE(std::isfinite(w));
}

TEST(Glm, ErrorsAndJson) {
  EXPECT_THROW(train_logistic(Dataset(FeatureSchema{{"x"}}), GlmParams{}), EmptyDataset);
  GlmParams bad;
  bad.l2 = -1.0;
  EXPECT_THROW(train_logistic(noisy(20, 1), bad), ConfigError);
  const auto m = train_logistic(noisy(100, 2), GlmParams{});
  EXPECT_EQ(GlmModel::from_json(nlohmann::json::parse(m.to_json().dump())), m);
  const double x[] = {1.0};
  EXPECT_THROW(m.probability(x), ArityMismatch);
}
