#include "schedpred/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "schedpred/errors.hpp"

namespace schedpred {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 (0-based) share rank mean of (i+1)..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch("correlation: vectors differ in length");
  if (x.size() < 2) throw DegenerateInput("correlation: need at least two observations");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("correlation: constant vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch("spearman: vectors differ in length");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

namespace {

constexpr double kRidge = 1e-12;
constexpr double kCollinearTolerance = 1e-10;

/// In-place Cholesky of a symmetric positive-definite row-major matrix.
/// Returns false when a pivot is not positive.
bool cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
  return true;
}

void cholesky_solve(const std::vector<double>& l, std::size_t n, std::vector<double>& b) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
    b[i] = s / l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * b[k];
    b[i] = s / l[i * n + i];
  }
}

}  // namespace

double vif(const ColumnMatrix& design, std::size_t j) {
  const std::size_t rows = design.rows();
  const std::size_t cols = design.cols();
  if (cols < 2) throw DegenerateInput("vif: need at least two columns");
  if (rows <= cols) throw DegenerateInput("vif: need more rows than columns");
  if (j >= cols) throw DegenerateInput("vif: column index out of range");

  // Centering every column absorbs the intercept.
  auto centered = [&](std::size_t c) {
    auto col = design.column(c);
    std::vector<double> v(col.begin(), col.end());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(rows);
    for (double& x : v) x -= mean;
    return v;
  };

  const std::vector<double> y = centered(j);
  const double sst = std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
  if (sst == 0.0) throw DegenerateInput("vif: target column is constant");

  std::vector<std::vector<double>> x;
  x.reserve(cols - 1);
  for (std::size_t c = 0; c < cols; ++c) {
    if (c != j) x.push_back(centered(c));
  }
  const std::size_t p = x.size();

  std::vector<double> gram(p * p);
  std::vector<double> rhs(p);
  double max_diag = 0.0;
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b <= a; ++b) {
      const double v = std::inner_product(x[a].begin(), x[a].end(), x[b].begin(), 0.0);
      gram[a * p + b] = v;
      gram[b * p + a] = v;
    }
    rhs[a] = std::inner_product(x[a].begin(), x[a].end(), y.begin(), 0.0);
    max_diag = std::max(max_diag, gram[a * p + a]);
  }
  if (max_diag == 0.0) return 1.0;  // every regressor constant: nothing explains y
  for (std::size_t a = 0; a < p; ++a) gram[a * p + a] += kRidge * max_diag;

  if (!cholesky(gram, p)) return kVifInfinity;
  cholesky_solve(gram, p, rhs);

  double ssr = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    double fitted = 0.0;
    for (std::size_t a = 0; a < p; ++a) fitted += x[a][r] * rhs[a];
    const double e = y[r] - fitted;
    ssr += e * e;
  }
  const double unexplained = std::min(1.0, ssr / sst);
  if (unexplained <= kCollinearTolerance) return kVifInfinity;
  return 1.0 / unexplained;
}

std::vector<double> vif_all(const ColumnMatrix& design) {
  std::vector<double> out(design.cols());
  for (std::size_t j = 0; j < design.cols(); ++j) out[j] = vif(design, j);
  return out;
}

}  // namespace schedpred
