#pragma once

// Statistical screens applied to attribute tables before model building:
// Spearman rank correlation and variance inflation factors.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "schedpred/errors.hpp"

namespace schedpred {

/// Ranks starting at 1; tied values share the average of their positions.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation. Throws LengthMismatch, or DegenerateInput when either
/// vector is constant or shorter than 2.
double pearson(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of the average-ranked vectors; same errors as pearson().
double spearman(std::span<const double> x, std::span<const double> y);

/// Dense column-major design matrix.
class ColumnMatrix {
 public:
  ColumnMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }
  std::span<double> column(std::size_t c) { return {data_.data() + c * rows_, rows_}; }
  std::span<const double> column(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

inline constexpr double kVifThreshold = 5.0;
inline constexpr double kVifInfinity = std::numeric_limits<double>::infinity();

/// 1 / (1 - R^2) of the least-squares regression (with intercept) of column
/// `j` on every other column. An exactly collinear column yields kVifInfinity.
/// Throws DegenerateInput unless cols >= 2, rows > cols and column j varies.
double vif(const ColumnMatrix& design, std::size_t j);

/// vif() for every column.
std::vector<double> vif_all(const ColumnMatrix& design);

}  // namespace schedpred
