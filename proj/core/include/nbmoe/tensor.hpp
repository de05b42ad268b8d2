#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace nbmoe::num {

/// Dense row-major matrix of doubles. Vectors are 1xN (row) or Nx1 (column).
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor row_vector(std::span<const double> values);
  static Tensor identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool same_shape(const Tensor& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  const std::vector<double>& values() const noexcept { return data_; }

  void fill(double value);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Pure (untracked) kernels. Binary elementwise ops accept an operand of the
// same shape, a 1xC row vector broadcast over rows, or an Rx1 column vector
// broadcast across each row. Anything else is a DimensionError.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor relu(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
Tensor layer_norm_rows(const Tensor& a, double eps = 1e-5);
Tensor column(const Tensor& a, std::size_t c);

double max_abs_diff(const Tensor& a, const Tensor& b);
bool all_finite(const Tensor& a) noexcept;
// Throws NumericError naming `op` when `a` contains NaN or Inf.
void ensure_finite(const Tensor& a, std::string_view op);

enum class Broadcast { Exact, Row, Column };
// Classifies how `b` broadcasts against `a`; throws DimensionError otherwise.
Broadcast broadcast_kind(const Tensor& a, const Tensor& b, std::string_view op);

}  // namespace nbmoe::num
