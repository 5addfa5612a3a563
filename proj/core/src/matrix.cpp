#include "mmslu/matrix.hpp"

#include <cmath>
#include <string>

#include "mmslu/error.hpp"
#include "mmslu/random.hpp"

namespace mmslu {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                     " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void Matrix::fill(double value) {
  for (double& v : data_) v = value;
}

Matrix glorot_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) {
    throw ShapeError("glorot_init requires nonzero dimensions, got " + std::to_string(rows) +
                     "x" + std::to_string(cols));
  }
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-bound, bound);
  return m;
}

Matrix glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  return glorot_init(rows, cols, rng);
}

void gemv_accumulate(const Matrix& m, std::span<const double> x, std::span<double> y) {
  if (x.size() != m.cols() || y.size() != m.rows()) {
    throw ShapeError("gemv: matrix " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                     " against x[" + std::to_string(x.size()) + "], y[" +
                     std::to_string(y.size()) + "]");
  }
  const std::size_t cols = m.cols();
  const double* w = m.values().data();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* row = w + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] += acc;
  }
}

void gemv_transpose_accumulate(const Matrix& m, std::span<const double> x, std::span<double> y) {
  if (x.size() != m.rows() || y.size() != m.cols()) {
    throw ShapeError("gemv_transpose: matrix " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + " against x[" + std::to_string(x.size()) +
                     "], y[" + std::to_string(y.size()) + "]");
  }
  const std::size_t cols = m.cols();
  const double* w = m.values().data();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += row[c] * xr;
  }
}

void outer_accumulate(Matrix& m, std::span<const double> a, std::span<const double> b) {
  if (a.size() != m.rows() || b.size() != m.cols()) {
    throw ShapeError("outer: matrix " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + " against a[" + std::to_string(a.size()) +
                     "], b[" + std::to_string(b.size()) + "]");
  }
  const std::size_t cols = m.cols();
  double* w = m.values().data();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double ar = a[r];
    if (ar == 0.0) continue;
    double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += ar * b[c];
  }
}

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace mmslu
