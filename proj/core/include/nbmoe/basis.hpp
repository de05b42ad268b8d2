#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "nbmoe/tensor.hpp"

namespace nbmoe::basis {

enum class StackType { Identity, Trend, Seasonality };

std::string_view to_string(StackType type);
StackType stack_type_from_string(std::string_view name);

inline constexpr std::size_t kMaxTrendDegree = 8;

struct BasisKind {
  StackType type = StackType::Identity;
  std::size_t degree = 0;  // polynomial degree, Trend only

  static BasisKind identity() { return {StackType::Identity, 0}; }
  static BasisKind trend(std::size_t degree) { return {StackType::Trend, degree}; }
  static BasisKind seasonality() { return {StackType::Seasonality, 0}; }
};

/// Fixed map from expansion coefficients to a signal of `length` steps:
/// signal = coefficients x matrix^T, with matrix of shape (length, n_coefficients).
struct BasisMatrix {
  num::Tensor matrix;
  std::size_t length = 0;

  std::size_t n_coefficients() const noexcept { return matrix.cols(); }
};

// Number of cos (and of sin) terms in the Fourier basis for horizon H.
std::size_t harmonic_count(std::size_t horizon);

// Coefficient width of a basis over `length` steps for forecast horizon H.
std::size_t coefficient_count(const BasisKind& kind, std::size_t length, std::size_t horizon);

/// Builds the basis over the normalized grid t_i = i / length.
///
/// Trend rows are [1, t, t^2, ..., t^d]. Seasonality rows are
/// [1, cos(2 pi k t) for k = 1..K, sin(2 pi k t) for k = 1..K] with
/// K = floor(H/2 + 1) taken from the forecast horizon for both the backcast
/// and forecast grids. Identity is the length x length identity.
BasisMatrix build_basis(const BasisKind& kind, std::size_t length, std::size_t horizon);

// coefficients (batch x n_coefficients) -> signal (batch x basis.length)
num::Tensor expand(const num::Tensor& coefficients, const BasisMatrix& basis);

}  // namespace nbmoe::basis
