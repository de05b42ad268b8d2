#include "nbmoe/model.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>

#include "nbmoe/errors.hpp"

namespace nbmoe::model {

using num::BoundParameters;
using num::Tensor;
using num::Tape;
using num::Var;

namespace {

std::string layer_name(const std::string& prefix, std::size_t layer) {
  return prefix + ".fc" + std::to_string(layer);
}

void add_linear(num::ParameterSet& params, const std::string& name, std::size_t in,
                std::size_t out, bool bias, std::uint64_t& rng) {
  params.add(name + ".weight", num::glorot_uniform(in, out, rng));
  if (bias) params.add(name + ".bias", Tensor(1, out));
}

Var linear(const BoundParameters& params, const std::string& name, Var x) {
  return num::add(num::matmul(x, params[name + ".weight"]), params[name + ".bias"]);
}

// Stack of FC + ReLU layers with the given widths.
void add_trunk(num::ParameterSet& params, const std::string& prefix, std::size_t input_width,
               const std::vector<std::size_t>& widths, std::uint64_t& rng) {
  std::size_t in = input_width;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    add_linear(params, layer_name(prefix, i), in, widths[i], true, rng);
    in = widths[i];
  }
}

Var trunk_forward(const BoundParameters& params, const std::string& prefix, std::size_t layers,
                  Var x) {
  for (std::size_t i = 0; i < layers; ++i) x = num::relu(linear(params, layer_name(prefix, i), x));
  return x;
}

std::string expert_prefix(const std::string& prefix, std::size_t e) {
  return prefix + ".expert" + std::to_string(e);
}

Var expert_forward(const BoundParameters& params, const std::string& prefix, const BlockSpec& spec,
                   std::size_t e, Var x) {
  const std::string ep = expert_prefix(prefix, e);
  Var h = trunk_forward(params, ep, spec.mlp_units.size(), x);
  if (spec.variant.kind == VariantKind::MoEScaled) h = linear(params, ep + ".proj", h);
  return h;
}

}  // namespace

std::string_view to_string(VariantKind kind) {
  switch (kind) {
    case VariantKind::Plain: return "plain";
    case VariantKind::MoEBlock: return "moe_block";
    case VariantKind::MoEShared: return "moe_shared";
    case VariantKind::MoEScaled: return "moe_scaled";
  }
  return "unknown";
}

VariantKind variant_kind_from_string(std::string_view name) {
  if (name == "plain") return VariantKind::Plain;
  if (name == "moe_block") return VariantKind::MoEBlock;
  if (name == "moe_shared") return VariantKind::MoEShared;
  if (name == "moe_scaled") return VariantKind::MoEScaled;
  throw ConfigError("unknown block variant: " + std::string(name));
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::NBeats: return "nbeats";
    case Variant::NBeatsMoe: return "nbeats-moe";
    case Variant::MoeBlock: return "moe-block";
    case Variant::MoeShared: return "moe-shared";
    case Variant::MoeScaled: return "moe-scaled";
  }
  return "unknown";
}

Variant variant_from_string(std::string_view name) {
  if (name == "nbeats") return Variant::NBeats;
  if (name == "nbeats-moe") return Variant::NBeatsMoe;
  if (name == "moe-block") return Variant::MoeBlock;
  if (name == "moe-shared") return Variant::MoeShared;
  if (name == "moe-scaled") return Variant::MoeScaled;
  throw ConfigError("unknown model variant: " + std::string(name));
}

void apply_variant(ModelConfig& config, Variant variant, std::size_t n_experts, std::size_t top_k) {
  config.output_gating = variant == Variant::NBeatsMoe;
  switch (variant) {
    case Variant::NBeats:
    case Variant::NBeatsMoe: config.block_variant = BlockVariant::plain(); break;
    case Variant::MoeBlock: config.block_variant = BlockVariant::moe_block(n_experts, top_k); break;
    case Variant::MoeShared: config.block_variant = BlockVariant::moe_shared(n_experts, top_k); break;
    case Variant::MoeScaled: config.block_variant = BlockVariant::moe_scaled(n_experts, top_k); break;
  }
}

void BlockSpec::validate() const {
  if (mlp_units.empty()) throw ConfigError("mlp_units must be nonempty");
  for (std::size_t w : mlp_units)
    if (w == 0) throw ConfigError("mlp_units entries must be >= 1");
  if (basis.type == basis::StackType::Trend && basis.degree > basis::kMaxTrendDegree) {
    throw ConfigError("trend_degree must be <= " + std::to_string(basis::kMaxTrendDegree));
  }
  if (!variant.is_moe()) return;
  if (variant.n_experts == 0) throw ConfigError("n_experts must be >= 1 for MoE variants");
  if (variant.top_k == 0 || variant.top_k > variant.n_experts) {
    throw ConfigError("top_k must satisfy 1 <= top_k <= n_experts (top_k=" +
                      std::to_string(variant.top_k) +
                      ", n_experts=" + std::to_string(variant.n_experts) + ")");
  }
  if (variant.kind == VariantKind::MoEScaled && !variant.expert_widths.empty()) {
    if (variant.expert_widths.size() != variant.n_experts)
      throw ConfigError("expert_widths must list one width per expert");
    for (std::size_t w : variant.expert_widths)
      if (w == 0) throw ConfigError("expert_widths entries must be >= 1");
  }
}

std::vector<std::size_t> BlockSpec::scaled_widths() const {
  if (!variant.expert_widths.empty()) return variant.expert_widths;
  const std::size_t w = width();
  const std::size_t cycle[3] = {std::max<std::size_t>(1, w / 4), std::max<std::size_t>(1, w / 2), w};
  std::vector<std::size_t> out(variant.n_experts);
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = cycle[e % 3];
  return out;
}

BlockSpec ModelConfig::block_spec(std::size_t stack) const {
  basis::BasisKind kind;
  switch (stack_types.at(stack)) {
    case basis::StackType::Identity: kind = basis::BasisKind::identity(); break;
    case basis::StackType::Trend: kind = basis::BasisKind::trend(trend_degree); break;
    case basis::StackType::Seasonality: kind = basis::BasisKind::seasonality(); break;
  }
  return BlockSpec{kind, mlp_units, block_variant};
}

void ModelConfig::validate() const {
  if (stack_types.empty()) throw ConfigError("stack_types must be nonempty");
  if (blocks_per_stack == 0) throw ConfigError("blocks_per_stack must be >= 1");
  if (lookback_multiplier < 1 || lookback_multiplier > 5)
    throw ConfigError("lookback_multiplier must be in 1..5");
  if (horizon == 0) throw ConfigError("horizon must be >= 1");
  if (trend_degree > basis::kMaxTrendDegree)
    throw ConfigError("trend_degree must be <= " + std::to_string(basis::kMaxTrendDegree));
  for (std::size_t s = 0; s < stack_types.size(); ++s) block_spec(s).validate();
}

Tensor top_k_mask(const Tensor& scores, std::size_t k) {
  if (k == 0 || k > scores.cols()) throw ConfigError("top_k out of range for expert count");
  Tensor mask(scores.rows(), scores.cols());
  std::vector<std::size_t> order(scores.cols());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores(r, a) > scores(r, b); });
    for (std::size_t i = 0; i < k; ++i) mask(r, order[i]) = 1.0;
  }
  return mask;
}

void init_block_parameters(num::ParameterSet& params, const std::string& prefix,
                           const BlockSpec& spec, std::size_t lookback, std::size_t horizon,
                           std::uint64_t& rng) {
  spec.validate();
  const std::size_t w = spec.width();
  switch (spec.variant.kind) {
    case VariantKind::Plain:
      add_trunk(params, prefix, lookback, spec.mlp_units, rng);
      break;
    case VariantKind::MoEBlock:
    case VariantKind::MoEShared:
      add_linear(params, prefix + ".router", lookback, spec.variant.n_experts, true, rng);
      for (std::size_t e = 0; e < spec.variant.n_experts; ++e)
        add_trunk(params, expert_prefix(prefix, e), lookback, spec.mlp_units, rng);
      if (spec.variant.kind == VariantKind::MoEShared)
        add_trunk(params, prefix + ".shared", lookback, spec.mlp_units, rng);
      break;
    case VariantKind::MoEScaled: {
      add_linear(params, prefix + ".router", lookback, spec.variant.n_experts, true, rng);
      const auto widths = spec.scaled_widths();
      for (std::size_t e = 0; e < widths.size(); ++e) {
        const std::string ep = expert_prefix(prefix, e);
        add_trunk(params, ep, lookback, std::vector<std::size_t>(spec.mlp_units.size(), widths[e]), rng);
        add_linear(params, ep + ".proj", widths[e], w, true, rng);
      }
      break;
    }
  }
  add_linear(params, prefix + ".theta_b", w, basis::coefficient_count(spec.basis, lookback, horizon),
             false, rng);
  add_linear(params, prefix + ".theta_f", w, basis::coefficient_count(spec.basis, horizon, horizon),
             false, rng);
}

Var moe_expert_layer(const BoundParameters& params, const std::string& prefix, const BlockSpec& spec,
                     Var input) {
  if (!spec.variant.is_moe()) throw ConfigError("moe_expert_layer requires an MoE block variant");
  if (spec.variant.top_k == 0 || spec.variant.top_k > spec.variant.n_experts)
    throw ConfigError("top_k must satisfy 1 <= top_k <= n_experts");

  Var logits = linear(params, prefix + ".router", input);
  const Tensor mask = top_k_mask(logits.value(), spec.variant.top_k);
  Var weights = num::masked_softmax_rows(logits, mask);

  std::optional<Var> mixture;
  for (std::size_t e = 0; e < spec.variant.n_experts; ++e) {
    bool selected = false;
    for (std::size_t r = 0; r < mask.rows() && !selected; ++r) selected = mask(r, e) != 0.0;
    // Unselected everywhere: weight is exactly 0, so the term is exactly 0.
    if (!selected) continue;
    Var term = num::mul(expert_forward(params, prefix, spec, e, input), num::column(weights, e));
    mixture = mixture ? num::add(*mixture, term) : term;
  }
  if (spec.variant.kind == VariantKind::MoEShared) {
    Var shared = trunk_forward(params, prefix + ".shared", spec.mlp_units.size(), input);
    return num::add(shared, *mixture);
  }
  return *mixture;
}

BlockOutput block_forward(const BoundParameters& params, const std::string& prefix,
                          const BlockSpec& spec, const basis::BasisMatrix& backcast_basis,
                          const basis::BasisMatrix& forecast_basis, Var input) {
  if (input.cols() != backcast_basis.length) {
    throw DimensionError("block input width " + std::to_string(input.cols()) +
                         " != lookback " + std::to_string(backcast_basis.length));
  }
  Var h = spec.variant.is_moe() ? moe_expert_layer(params, prefix, spec, input)
                                : trunk_forward(params, prefix, spec.mlp_units.size(), input);
  Var theta_b = num::matmul(h, params[prefix + ".theta_b.weight"]);
  Var theta_f = num::matmul(h, params[prefix + ".theta_f.weight"]);
  Tape& tape = input.tape();
  Var back_t = tape.constant(num::transpose(backcast_basis.matrix));
  Var fore_t = tape.constant(num::transpose(forecast_basis.matrix));
  return BlockOutput{num::matmul(theta_b, back_t), num::matmul(theta_f, fore_t)};
}

GateNodes gate_forward(const BoundParameters& params, Var x0) {
  Var normalized = num::layer_norm_rows(x0);
  Var logits = num::add(num::matmul(normalized, params["gate.weight"]), params["gate.bias"]);
  return GateNodes{num::softmax_rows(logits), logits};
}

Tensor ForecastBundle::stack_gate_weights(std::size_t blocks_per_stack) const {
  if (!gate) throw ConfigError("model has no output gate");
  const Tensor& w = gate->weights;
  if (blocks_per_stack == 0 || w.cols() % blocks_per_stack != 0)
    throw DimensionError("gate width is not a multiple of blocks_per_stack");
  const std::size_t stacks = w.cols() / blocks_per_stack;
  Tensor out(w.rows(), stacks);
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t s = 0; s < stacks; ++s)
      for (std::size_t b = 0; b < blocks_per_stack; ++b) out(r, s) += w(r, s * blocks_per_stack + b);
  return out;
}

ForecastBundle ForecastGraph::materialize() const {
  ForecastBundle out;
  out.forecast = forecast.value();
  for (const auto& v : block_forecasts) out.block_forecasts.push_back(v.value());
  for (const auto& v : block_backcasts) out.block_backcasts.push_back(v.value());
  if (gate_weights) out.gate = GateWeights{gate_weights->value(), gate_logits->value()};
  for (const auto& v : stack_forecasts) out.stack_forecasts.push_back(v.value());
  out.residual = residual.value();
  return out;
}

Model::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  std::uint64_t rng = seed;
  const std::size_t lookback = config_.lookback();
  for (std::size_t s = 0; s < config_.stack_types.size(); ++s) {
    const BlockSpec spec = config_.block_spec(s);
    backcast_bases_.push_back(basis::build_basis(spec.basis, lookback, config_.horizon));
    forecast_bases_.push_back(basis::build_basis(spec.basis, config_.horizon, config_.horizon));
    const std::size_t distinct = config_.shared_weights ? 1 : config_.blocks_per_stack;
    for (std::size_t b = 0; b < distinct; ++b)
      init_block_parameters(params_, block_prefix(s, b), spec, lookback, config_.horizon, rng);
  }
  if (config_.output_gating) {
    // Zero gate: training starts from uniform block weights.
    params_.add("gate.weight", Tensor(lookback, config_.total_blocks()));
    params_.add("gate.bias", Tensor(1, config_.total_blocks()));
  }
}

std::string Model::block_prefix(std::size_t stack, std::size_t block) const {
  const std::size_t b = config_.shared_weights ? 0 : block;
  return "stack" + std::to_string(stack) + ".block" + std::to_string(b);
}

ForecastGraph Model::forward(const BoundParameters& params, Var x0) const {
  if (x0.cols() != config_.lookback()) {
    throw DimensionError("model input width " + std::to_string(x0.cols()) + " != lookback " +
                         std::to_string(config_.lookback()));
  }
  ForecastGraph g;
  Var residual = x0;
  for (std::size_t s = 0; s < config_.stack_types.size(); ++s) {
    const BlockSpec spec = config_.block_spec(s);
    for (std::size_t b = 0; b < config_.blocks_per_stack; ++b) {
      BlockOutput out = block_forward(params, block_prefix(s, b), spec, backcast_bases_[s],
                                      forecast_bases_[s], residual);
      residual = num::sub(residual, out.backcast);
      g.block_backcasts.push_back(out.backcast);
      g.block_forecasts.push_back(out.forecast);
    }
  }
  g.residual = residual;

  std::vector<Var> contributions = g.block_forecasts;
  if (config_.output_gating) {
    GateNodes gate = gate_forward(params, x0);
    g.gate_weights = gate.weights;
    g.gate_logits = gate.logits;
    for (std::size_t l = 0; l < contributions.size(); ++l)
      contributions[l] = num::mul(g.block_forecasts[l], num::column(gate.weights, l));
  }

  std::optional<Var> total;
  for (std::size_t s = 0; s < config_.stack_types.size(); ++s) {
    std::optional<Var> stack_sum;
    for (std::size_t b = 0; b < config_.blocks_per_stack; ++b) {
      Var c = contributions[s * config_.blocks_per_stack + b];
      stack_sum = stack_sum ? num::add(*stack_sum, c) : c;
      total = total ? num::add(*total, c) : c;
    }
    g.stack_forecasts.push_back(*stack_sum);
  }
  g.forecast = *total;
  return g;
}

ForecastBundle Model::predict(const Tensor& x0) const {
  num::Tape tape;
  BoundParameters params(tape, params_);
  return forward(params, tape.constant(x0)).materialize();
}

GateWeights Model::gate(const Tensor& x0) const {
  if (!config_.output_gating) throw ConfigError("model has no output gate");
  if (x0.cols() != config_.lookback()) throw DimensionError("gate input width != lookback");
  num::Tape tape;
  BoundParameters params(tape, params_);
  GateNodes g = gate_forward(params, tape.constant(x0));
  return GateWeights{g.weights.value(), g.logits.value()};
}

}  // namespace nbmoe::model
