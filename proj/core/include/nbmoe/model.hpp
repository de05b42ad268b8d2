#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nbmoe/autodiff.hpp"
#include "nbmoe/basis.hpp"
#include "nbmoe/parameters.hpp"
#include "nbmoe/tensor.hpp"

namespace nbmoe::model {

enum class VariantKind { Plain, MoEBlock, MoEShared, MoEScaled };

std::string_view to_string(VariantKind kind);
VariantKind variant_kind_from_string(std::string_view name);

/// How the FC trunk of a block is built.
///
/// Plain uses one trunk. The MoE kinds replace it with `n_experts` trunks and
/// a linear router over the block input; the `top_k` highest-scoring experts
/// are mixed with a softmax renormalized over the selection. MoEShared adds
/// one always-on shared trunk on top of the `n_experts` routed ones.
/// MoEScaled experts have per-expert widths and a projection back to the
/// common trunk width.
struct BlockVariant {
  VariantKind kind = VariantKind::Plain;
  std::size_t n_experts = 0;
  std::size_t top_k = 0;
  std::vector<std::size_t> expert_widths;  // MoEScaled only; empty = default

  static BlockVariant plain() { return {}; }
  static BlockVariant moe_block(std::size_t n, std::size_t k) { return {VariantKind::MoEBlock, n, k, {}}; }
  static BlockVariant moe_shared(std::size_t n, std::size_t k) { return {VariantKind::MoEShared, n, k, {}}; }
  static BlockVariant moe_scaled(std::size_t n, std::size_t k, std::vector<std::size_t> widths = {}) {
    return {VariantKind::MoEScaled, n, k, std::move(widths)};
  }
  bool is_moe() const noexcept { return kind != VariantKind::Plain; }
};

struct BlockSpec {
  basis::BasisKind basis;
  std::vector<std::size_t> mlp_units;
  BlockVariant variant;

  void validate() const;
  // Trunk output width (last entry of mlp_units).
  std::size_t width() const { return mlp_units.back(); }
  // Resolved MoEScaled expert widths: explicit list, or cycling {w/4, w/2, w}.
  std::vector<std::size_t> scaled_widths() const;
};

/// User-facing model families.
enum class Variant { NBeats, NBeatsMoe, MoeBlock, MoeShared, MoeScaled };

std::string_view to_string(Variant v);
Variant variant_from_string(std::string_view name);

struct ModelConfig {
  std::vector<basis::StackType> stack_types{basis::StackType::Identity, basis::StackType::Trend,
                                            basis::StackType::Seasonality};
  std::size_t blocks_per_stack = 1;
  std::size_t lookback_multiplier = 2;
  std::size_t horizon = 1;
  std::vector<std::size_t> mlp_units{32, 32};
  BlockVariant block_variant;
  bool output_gating = false;
  bool shared_weights = true;
  std::size_t trend_degree = 3;

  std::size_t lookback() const noexcept { return lookback_multiplier * horizon; }
  std::size_t total_blocks() const noexcept { return stack_types.size() * blocks_per_stack; }
  BlockSpec block_spec(std::size_t stack) const;
  void validate() const;

  std::string to_json() const;
  static ModelConfig from_json(std::string_view text);
};

// Sets gating and block variant for a model family. Expert counts are
// ignored for nbeats / nbeats-moe.
void apply_variant(ModelConfig& config, Variant variant, std::size_t n_experts = 0,
                   std::size_t top_k = 0);

struct GateWeights {
  num::Tensor weights;  // batch x B, rows sum to 1
  num::Tensor logits;   // batch x B
};

/// Materialized forward pass. With gating, stack_forecasts hold the
/// gate-weighted contributions; without, the plain per-stack sums.
struct ForecastBundle {
  num::Tensor forecast;
  std::vector<num::Tensor> block_forecasts;
  std::vector<num::Tensor> block_backcasts;
  std::optional<GateWeights> gate;
  std::vector<num::Tensor> stack_forecasts;
  num::Tensor residual;  // residual leaving the last block

  // batch x S gate weights, block weights summed per stack.
  num::Tensor stack_gate_weights(std::size_t blocks_per_stack) const;
};

/// Same as ForecastBundle but as tape nodes.
struct ForecastGraph {
  num::Var forecast;
  std::vector<num::Var> block_forecasts;
  std::vector<num::Var> block_backcasts;
  std::optional<num::Var> gate_weights;
  std::optional<num::Var> gate_logits;
  std::vector<num::Var> stack_forecasts;
  num::Var residual;

  ForecastBundle materialize() const;
};

struct BlockOutput {
  num::Var backcast;
  num::Var forecast;
};

// Registers the parameters of one block (or of a shared stack block) under
// `prefix` using Glorot-uniform trunk weights and zero biases.
void init_block_parameters(num::ParameterSet& params, const std::string& prefix,
                           const BlockSpec& spec, std::size_t lookback, std::size_t horizon,
                           std::uint64_t& rng_state);

// Routed expert trunk for the MoE variants: (batch x L) -> (batch x width).
num::Var moe_expert_layer(const num::BoundParameters& params, const std::string& prefix,
                          const BlockSpec& spec, num::Var input);

// FC trunk -> theta heads -> basis expansion.
BlockOutput block_forward(const num::BoundParameters& params, const std::string& prefix,
                          const BlockSpec& spec, const basis::BasisMatrix& backcast_basis,
                          const basis::BasisMatrix& forecast_basis, num::Var input);

// logits = LINEAR(layer_norm_rows(x0)), weights = softmax_rows(logits).
struct GateNodes {
  num::Var weights;
  num::Var logits;
};
GateNodes gate_forward(const num::BoundParameters& params, num::Var x0);

// Top-k selection mask per row; ties resolved toward the lowest index.
num::Tensor top_k_mask(const num::Tensor& scores, std::size_t k);

class Model {
 public:
  explicit Model(ModelConfig config, std::uint64_t seed = 0);

  const ModelConfig& config() const noexcept { return config_; }
  num::ParameterSet& parameters() noexcept { return params_; }
  const num::ParameterSet& parameters() const noexcept { return params_; }

  // Parameter-name prefix of block `block` in stack `stack`. With shared
  // weights every block of a stack maps to the same prefix.
  std::string block_prefix(std::size_t stack, std::size_t block) const;

  const basis::BasisMatrix& backcast_basis(std::size_t stack) const { return backcast_bases_.at(stack); }
  const basis::BasisMatrix& forecast_basis(std::size_t stack) const { return forecast_bases_.at(stack); }

  ForecastGraph forward(const num::BoundParameters& params, num::Var x0) const;
  ForecastBundle predict(const num::Tensor& x0) const;
  GateWeights gate(const num::Tensor& x0) const;

 private:
  ModelConfig config_;
  num::ParameterSet params_;
  std::vector<basis::BasisMatrix> backcast_bases_;
  std::vector<basis::BasisMatrix> forecast_bases_;
};

}  // namespace nbmoe::model
