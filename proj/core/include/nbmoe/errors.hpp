#pragma once

#include <stdexcept>
#include <string>

namespace nbmoe {

// Shape or width mismatch between operands.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid architectural, training or search configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or insufficient input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN or Inf produced by (or fed into) a numeric operation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API misuse, e.g. calling backward on a non-scalar node.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Training produced a non-finite loss; the best snapshot has been restored.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nbmoe
