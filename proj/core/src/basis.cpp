#include "nbmoe/basis.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "nbmoe/errors.hpp"

namespace nbmoe::basis {

std::string_view to_string(StackType type) {
  switch (type) {
    case StackType::Identity: return "identity";
    case StackType::Trend: return "trend";
    case StackType::Seasonality: return "seasonality";
  }
  return "unknown";
}

StackType stack_type_from_string(std::string_view name) {
  if (name == "identity") return StackType::Identity;
  if (name == "trend") return StackType::Trend;
  if (name == "seasonality" || name == "seasonal") return StackType::Seasonality;
  throw ConfigError("unknown stack type: " + std::string(name));
}

std::size_t harmonic_count(std::size_t horizon) { return horizon / 2 + 1; }

std::size_t coefficient_count(const BasisKind& kind, std::size_t length, std::size_t horizon) {
  switch (kind.type) {
    case StackType::Identity: return length;
    case StackType::Trend: return kind.degree + 1;
    case StackType::Seasonality: return 1 + 2 * harmonic_count(horizon);
  }
  return 0;
}

BasisMatrix build_basis(const BasisKind& kind, std::size_t length, std::size_t horizon) {
  if (length == 0) throw ConfigError("basis length must be >= 1");
  if (horizon == 0) throw ConfigError("basis horizon must be >= 1");
  if (kind.type == StackType::Trend && kind.degree > kMaxTrendDegree) {
    throw ConfigError("trend degree " + std::to_string(kind.degree) + " exceeds cap " +
                      std::to_string(kMaxTrendDegree));
  }

  const std::size_t width = coefficient_count(kind, length, horizon);
  num::Tensor m(length, width);
  const double n = static_cast<double>(length);

  switch (kind.type) {
    case StackType::Identity:
      m = num::Tensor::identity(length);
      break;
    case StackType::Trend:
      for (std::size_t i = 0; i < length; ++i) {
        const double t = static_cast<double>(i) / n;
        double p = 1.0;
        for (std::size_t k = 0; k <= kind.degree; ++k) {
          m(i, k) = p;
          p *= t;
        }
      }
      break;
    case StackType::Seasonality: {
      const std::size_t harmonics = harmonic_count(horizon);
      for (std::size_t i = 0; i < length; ++i) {
        const double t = static_cast<double>(i) / n;
        m(i, 0) = 1.0;
        for (std::size_t k = 1; k <= harmonics; ++k) {
          const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) * t;
          m(i, k) = std::cos(angle);
          m(i, harmonics + k) = std::sin(angle);
        }
      }
      break;
    }
  }
  return BasisMatrix{std::move(m), length};
}

num::Tensor expand(const num::Tensor& coefficients, const BasisMatrix& basis) {
  if (coefficients.cols() != basis.n_coefficients()) {
    throw DimensionError("expand: coefficient width " + std::to_string(coefficients.cols()) +
                         " != basis width " + std::to_string(basis.n_coefficients()));
  }
  return num::matmul(coefficients, num::transpose(basis.matrix));
}

}  // namespace nbmoe::basis
