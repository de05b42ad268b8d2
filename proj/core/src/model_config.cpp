#include <string>

#include <json.hpp>

#include "nbmoe/errors.hpp"
#include "nbmoe/model.hpp"

namespace nbmoe::model {

std::string ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  std::vector<std::string> stacks;
  for (auto s : stack_types) stacks.emplace_back(basis::to_string(s));
  j["stack_types"] = stacks;
  j["blocks_per_stack"] = blocks_per_stack;
  j["lookback_multiplier"] = lookback_multiplier;
  j["horizon"] = horizon;
  j["mlp_units"] = mlp_units;
  j["block_variant"] = {{"kind", std::string(to_string(block_variant.kind))},
                        {"n_experts", block_variant.n_experts},
                        {"top_k", block_variant.top_k},
                        {"expert_widths", block_variant.expert_widths}};
  j["output_gating"] = output_gating;
  j["shared_weights"] = shared_weights;
  j["trend_degree"] = trend_degree;
  return j.dump(2);
}

ModelConfig ModelConfig::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config is not valid JSON: ") + e.what());
  }
  ModelConfig c;
  try {
    if (j.contains("stack_types")) {
      c.stack_types.clear();
      for (const auto& s : j["stack_types"]) c.stack_types.push_back(basis::stack_type_from_string(s.get<std::string>()));
    }
    c.blocks_per_stack = j.value("blocks_per_stack", c.blocks_per_stack);
    c.lookback_multiplier = j.value("lookback_multiplier", c.lookback_multiplier);
    c.horizon = j.value("horizon", c.horizon);
    if (j.contains("mlp_units")) c.mlp_units = j["mlp_units"].get<std::vector<std::size_t>>();
    if (j.contains("block_variant")) {
      const auto& v = j["block_variant"];
      c.block_variant.kind = variant_kind_from_string(v.value("kind", std::string("plain")));
      c.block_variant.n_experts = v.value("n_experts", std::size_t{0});
      c.block_variant.top_k = v.value("top_k", std::size_t{0});
      if (v.contains("expert_widths"))
        c.block_variant.expert_widths = v["expert_widths"].get<std::vector<std::size_t>>();
    }
    c.output_gating = j.value("output_gating", c.output_gating);
    c.shared_weights = j.value("shared_weights", c.shared_weights);
    c.trend_degree = j.value("trend_degree", c.trend_degree);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config field has wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace nbmoe::model
