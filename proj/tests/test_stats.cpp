#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "schedpred/rng.hpp"
#include "schedpred/stats.hpp"

using namespace schedpred;

namespace {

// Ranks by counting: rank(v) = #{w < v} + (#{w == v} + 1) / 2.
std::vector<double> count_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (double w : v) {
      if (w < v[i]) less += 1.0;
      if (w == v[i]) equal += 1.0;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

double textbook_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double oracle_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return textbook_pearson(count_ranks(x), count_ranks(y));
}

}  // namespace

TEST(Spearman, MonotoneExamples) {
  EXPECT_DOUBLE_EQ(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{10, 20, 30}), 1.0);
  EXPECT_DOUBLE_EQ(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0);
}

TEST(Spearman, TiedExampleMatchesOracle) {
  const std::vector<double> x = {1, 2, 2, 4}, y = {3, 1, 4, 2};
  EXPECT_NEAR(spearman(x, y), oracle_spearman(x, y), 1e-12);
}

TEST(Spearman, Errors) {
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), LengthMismatch);
  EXPECT_THROW(spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), DegenerateInput);
  EXPECT_THROW(spearman(std::vector<double>{1}, std::vector<double>{1}), DegenerateInput);
}

TEST(Spearman, RandomVectorsMatchOracle) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rng.range(2, 60));
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.range(0, 8));
      y[i] = rng.uniform() < 0.5 ? static_cast<double>(rng.range(0, 5)) : rng.normal();
    }
    x[0] = -1.0;
    y[1 % n] = 100.0;
    EXPECT_NEAR(spearman(x, y), oracle_spearman(x, y), 1e-12);
  }
}

TEST(Spearman, SelfAndMonotoneTransformInvariance) {
  Rng rng(4);
  std::vector<double> x(50), y(50);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
  }
  EXPECT_NEAR(spearman(x, x), 1.0, 1e-12);
  std::vector<double> ex(x.size());
  std::transform(x.begin(), x.end(), ex.begin(), [](double v) { return std::exp(3.0 * v) + 7.0; });
  EXPECT_NEAR(spearman(ex, y), spearman(x, y), 1e-12);
}

TEST(AverageRanks, Ties) {
  EXPECT_EQ(average_ranks(std::vector<double>{1, 2, 2, 4}), (std::vector<double>{1, 2.5, 2.5, 4}));
}

TEST(Vif, IndependentColumnsNearOne) {
  Rng rng(8);
  ColumnMatrix m(2000, 3);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < 3; ++c) m(r, c) = rng.normal();
  }
  for (double v : vif_all(m)) EXPECT_NEAR(v, 1.0, 0.02);
}

TEST(Vif, OrthogonalColumnsExactlyOne) {
  ColumnMatrix m(4, 2);
  const double a[] = {1, -1, 1, -1}, b[] = {1, 1, -1, -1};
  for (std::size_t r = 0; r < 4; ++r) {
    m(r, 0) = a[r];
    m(r, 1) = b[r];
  }
  EXPECT_NEAR(vif(m, 0), 1.0, 1e-9);
}

TEST(Vif, DuplicatedColumnIsInfinite) {
  Rng rng(3);
  ColumnMatrix m(100, 3);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    m(r, 0) = rng.normal();
    m(r, 1) = rng.normal();
    m(r, 2) = m(r, 0);
  }
  EXPECT_EQ(vif(m, 0), kVifInfinity);
  EXPECT_EQ(vif(m, 2), kVifInfinity);
}

TEST(Vif, KnownCorrelation) {
  // Two columns with sample correlation r give vif = 1 / (1 - r^2).
  Rng rng(21);
  ColumnMatrix m(500, 2);
  std::vector<double> x(500), y(500);
  for (std::size_t r = 0; r < 500; ++r) {
    x[r] = rng.normal();
    y[r] = 0.6 * x[r] + 0.8 * rng.normal();
    m(r, 0) = x[r];
    m(r, 1) = y[r];
  }
  const double rho = textbook_pearson(x, y);
  EXPECT_NEAR(vif(m, 0), 1.0 / (1.0 - rho * rho), 1e-8);
}

TEST(Vif, Errors) {
  ColumnMatrix one(10, 1);
  EXPECT_THROW(vif(one, 0), DegenerateInput);
  ColumnMatrix wide(3, 3);
  EXPECT_THROW(vif(wide, 0), DegenerateInput);
  ColumnMatrix constant(10, 2);
  for (std::size_t r = 0; r < 10; ++r) constant(r, 1) = static_cast<double>(r);
  EXPECT_THROW(vif(constant, 0), DegenerateInput);
}
