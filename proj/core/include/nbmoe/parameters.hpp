#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nbmoe/autodiff.hpp"
#include "nbmoe/tensor.hpp"

namespace nbmoe::num {

/// Named trainable tensors in insertion order. Names are stable across runs
/// and double as checkpoint keys.
class ParameterSet {
 public:
  // Throws ConfigError on duplicate names.
  std::size_t add(std::string name, Tensor value);

  bool contains(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;
  Tensor& at(std::size_t index) { return values_.at(index); }
  const Tensor& at(std::size_t index) const { return values_.at(index); }
  const std::string& name(std::size_t index) const { return names_.at(index); }

  std::size_t size() const noexcept { return values_.size(); }
  // Total scalar count across all tensors.
  std::size_t scalar_count() const noexcept;

  const std::vector<Tensor>& values() const noexcept { return values_; }
  std::vector<Tensor>& values() noexcept { return values_; }

  // Flat {name -> {rows, cols, data[]}} JSON object.
  std::string to_json() const;
  // Overwrites existing tensors by name; every stored name must be present
  // with matching shape.
  void load_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Parameters of a ParameterSet recorded as tracked leaves on one tape.
class BoundParameters {
 public:
  BoundParameters(Tape& tape, const ParameterSet& params);

  Var operator[](std::string_view name) const;
  Var operator[](std::size_t index) const { return vars_.at(index); }
  Tape& tape() const noexcept { return *tape_; }
  // Gradients after tape.backward(), aligned with the ParameterSet order.
  std::vector<Tensor> gradients() const;

 private:
  Tape* tape_;
  const ParameterSet* params_;
  std::vector<Var> vars_;
};

// Glorot-uniform initializer: U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::uint64_t& rng_state);

// Uniform draw in [0, 1) from a splitmix64 stream; platform-independent.
double uniform01(std::uint64_t& rng_state);
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace nbmoe::num
