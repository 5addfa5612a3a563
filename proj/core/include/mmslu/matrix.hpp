#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mmslu {

class Rng;

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double value);
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Glorot-uniform: entries drawn from [-b, b], b = sqrt(6 / (rows + cols)).
Matrix glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed);
Matrix glorot_init(std::size_t rows, std::size_t cols, Rng& rng);

/// y += m * x
void gemv_accumulate(const Matrix& m, std::span<const double> x, std::span<double> y);
/// y += m^T * x
void gemv_transpose_accumulate(const Matrix& m, std::span<const double> x, std::span<double> y);
/// m += a * b^T
void outer_accumulate(Matrix& m, std::span<const double> a, std::span<const double> b);

bool all_finite(std::span<const double> values);

}  // namespace mmslu
