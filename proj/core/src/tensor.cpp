#include "nbmoe/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nbmoe/errors.hpp"

namespace nbmoe::num {

namespace {

std::string shape_str(const Tensor& t) {
  return "(" + std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ")";
}

template <typename F>
Tensor broadcast_binary(const Tensor& a, const Tensor& b, std::string_view op, F f) {
  const Broadcast kind = broadcast_kind(a, b, op);
  Tensor out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      double rhs = 0.0;
      switch (kind) {
        case Broadcast::Exact: rhs = b(r, c); break;
        case Broadcast::Row: rhs = b(0, c); break;
        case Broadcast::Column: rhs = b(r, 0); break;
      }
      out(r, c) = f(a(r, c), rhs);
    }
  }
  ensure_finite(out, op);
  return out;
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + std::to_string(rows_) + "x" +
                         std::to_string(cols_));
  }
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = n_rows == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(n_rows * n_cols);
  for (const auto& r : rows) {
    if (r.size() != n_cols) throw DimensionError("ragged rows in Tensor::from_rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Tensor(n_rows, n_cols, std::move(data));
}

Tensor Tensor::row_vector(std::span<const double> values) {
  return Tensor(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Broadcast broadcast_kind(const Tensor& a, const Tensor& b, std::string_view op) {
  if (a.same_shape(b)) return Broadcast::Exact;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::Row;
  if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::Column;
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                       shape_str(b));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ " + shape_str(a) + " x " +
                         shape_str(b));
  }
  Tensor out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.data().data() + i * n;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* b_row = b.data().data() + k * n;
      for (std::size_t j = 0; j < n; ++j) out_row[j] += aik * b_row[j];
    }
  }
  ensure_finite(out, "matmul");
  return out;
}

Tensor transpose(const Tensor& a) {
  Tensor out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  return broadcast_binary(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return broadcast_binary(a, b, "sub", [](double x, double y) { return x - y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return broadcast_binary(a, b, "mul", [](double x, double y) { return x * y; });
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out = a;
  for (double& v : out.data()) v *= factor;
  ensure_finite(out, "scale");
  return out;
}

Tensor relu(const Tensor& a) {
  Tensor out = a;
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  return out;
}

Tensor softmax_rows(const Tensor& a) {
  ensure_finite(a, "softmax_rows");
  Tensor out(a.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto in = a.row(r);
    auto dst = out.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      dst[c] = std::exp(in[c] - mx);
      total += dst[c];
    }
    for (double& v : dst) v /= total;
  }
  return out;
}

Tensor layer_norm_rows(const Tensor& a, double eps) {
  ensure_finite(a, "layer_norm_rows");
  Tensor out(a.rows(), a.cols());
  const double n = static_cast<double>(a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto in = a.row(r);
    double mean = 0.0;
    for (double v : in) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= n;
    const double inv_std = 1.0 / std::sqrt(var + eps);
    auto dst = out.row(r);
    for (std::size_t c = 0; c < in.size(); ++c) dst[c] = (in[c] - mean) * inv_std;
  }
  return out;
}

Tensor column(const Tensor& a, std::size_t c) {
  if (c >= a.cols()) {
    throw DimensionError("column index " + std::to_string(c) + " out of range for " +
                         shape_str(a));
  }
  Tensor out(a.rows(), 1);
  for (std::size_t r = 0; r < a.rows(); ++r) out(r, 0) = a(r, c);
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("max_abs_diff: shapes differ " + shape_str(a) + " vs " + shape_str(b));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

bool all_finite(const Tensor& a) noexcept {
  return std::all_of(a.data().begin(), a.data().end(),
                     [](double v) { return std::isfinite(v); });
}

void ensure_finite(const Tensor& a, std::string_view op) {
  if (!all_finite(a)) throw NumericError(std::string(op) + ": non-finite value in result");
}

}  // namespace nbmoe::num
