#include "nbmoe/hpo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nbmoe/errors.hpp"
#include "nbmoe/evaluation.hpp"
#include "nbmoe/parameters.hpp"

namespace nbmoe::hpo {

using model::Variant;

namespace {

bool uses_experts(Variant v) { return v != Variant::NBeats && v != Variant::NBeatsMoe; }

std::size_t pick(const std::vector<std::size_t>& options, std::uint64_t& rng) {
  return options[num::splitmix64(rng) % options.size()];
}

void require_nonempty(const std::vector<std::size_t>& v, const char* name) {
  if (v.empty()) throw ConfigError(std::string("search space field '") + name + "' is empty");
}

}  // namespace

SearchSpace SearchSpace::defaults(Variant variant) {
  SearchSpace s;
  if (variant == Variant::NBeats) s.mlp_exponents.push_back(10);
  return s;
}

void SearchSpace::validate(Variant variant) const {
  require_nonempty(input_multipliers, "input_multipliers");
  require_nonempty(mlp_exponents, "mlp_exponents");
  require_nonempty(blocks_per_stack, "blocks_per_stack");
  require_nonempty(max_steps, "max_steps");
  require_nonempty(batch_sizes, "batch_sizes");
  require_nonempty(windows_batch_sizes, "windows_batch_sizes");
  require_nonempty(patience, "patience");
  for (auto m : input_multipliers)
    if (m < 1 || m > 5) throw ConfigError("input multiplier must be in 1..5");
  for (auto e : mlp_exponents)
    if (e > 16) throw ConfigError("mlp exponent too large");
  if (uses_experts(variant)) {
    require_nonempty(n_experts, "n_experts");
    require_nonempty(top_k, "top_k");
    const auto max_experts = *std::max_element(n_experts.begin(), n_experts.end());
    const auto min_k = *std::min_element(top_k.begin(), top_k.end());
    if (min_k == 0 || min_k > max_experts)
      throw ConfigError("no (n_experts, top_k) pair satisfies 1 <= top_k <= n_experts");
  }
}

std::string SearchSpace::to_json() const {
  nlohmann::ordered_json j;
  j["input_multipliers"] = input_multipliers;
  j["mlp_exponents"] = mlp_exponents;
  j["blocks_per_stack"] = blocks_per_stack;
  j["n_experts"] = n_experts;
  j["top_k"] = top_k;
  j["max_steps"] = max_steps;
  j["batch_sizes"] = batch_sizes;
  j["windows_batch_sizes"] = windows_batch_sizes;
  j["patience"] = patience;
  return j.dump(2);
}

SearchSpace SearchSpace::from_json(std::string_view text, Variant variant) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("search space is not valid JSON: ") + e.what());
  }
  SearchSpace s = defaults(variant);
  auto read = [&](const char* key, std::vector<std::size_t>& dst) {
    if (j.contains(key)) dst = j[key].get<std::vector<std::size_t>>();
  };
  try {
    read("input_multipliers", s.input_multipliers);
    read("mlp_exponents", s.mlp_exponents);
    read("blocks_per_stack", s.blocks_per_stack);
    read("n_experts", s.n_experts);
    read("top_k", s.top_k);
    read("max_steps", s.max_steps);
    read("batch_sizes", s.batch_sizes);
    read("windows_batch_sizes", s.windows_batch_sizes);
    read("patience", s.patience);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("search space field has wrong type: ") + e.what());
  }
  s.validate(variant);
  return s;
}

std::vector<TrialConfig> sample_configs(const SearchSpace& space, Variant variant,
                                        const model::ModelConfig& base_model,
                                        const train::TrainConfig& base_train, std::size_t n_trials,
                                        std::uint64_t seed) {
  space.validate(variant);
  std::uint64_t rng = seed;
  std::vector<TrialConfig> out;
  out.reserve(n_trials);
  for (std::size_t i = 0; i < n_trials; ++i) {
    TrialConfig c{base_model, base_train};
    c.model.lookback_multiplier = pick(space.input_multipliers, rng);
    const std::size_t units = std::size_t{1} << pick(space.mlp_exponents, rng);
    c.model.mlp_units = {units, units};
    c.model.blocks_per_stack = pick(space.blocks_per_stack, rng);
    c.model.shared_weights = true;
    std::size_t experts = 0, k = 0;
    if (uses_experts(variant)) {
      do {
        experts = pick(space.n_experts, rng);
        k = pick(space.top_k, rng);
      } while (k > experts);
    }
    model::apply_variant(c.model, variant, experts, k);
    c.train.max_steps = pick(space.max_steps, rng);
    c.train.batch_size = pick(space.batch_sizes, rng);
    c.train.windows_batch_size = pick(space.windows_batch_sizes, rng);
    c.train.patience = pick(space.patience, rng);
    out.push_back(std::move(c));
  }
  return out;
}

SearchResult run_search(const SearchSpace& space, Variant variant,
                        const model::ModelConfig& base_model, const train::TrainConfig& base_train,
                        std::size_t n_trials, std::uint64_t seed, const TrialEvaluator& evaluate,
                        std::size_t threads) {
  if (n_trials == 0) throw ConfigError("n_trials must be >= 1");
  const auto configs = sample_configs(space, variant, base_model, base_train, n_trials, seed);

  SearchResult result;
  result.trials.resize(n_trials);
  auto run_one = [&](std::size_t i) {
    TrialRecord& rec = result.trials[i];
    rec.index = i;
    rec.seed = seed + i;
    rec.config = configs[i];
    rec.config.train.seed = rec.seed;
    try {
      TrialOutcome outcome = evaluate(rec.config, rec.seed);
      rec.val_smape = outcome.val_smape;
      rec.report = std::move(outcome.report);
      if (!std::isfinite(rec.val_smape)) {
        rec.failed = true;
        rec.failure = "validation SMAPE is not finite";
      }
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.failure = e.what();
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n_trials));
  if (workers == 1) {
    for (std::size_t i = 0; i < n_trials; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n_trials; i = next++) run_one(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& rec : result.trials) {
    if (rec.failed) continue;
    if (!any || rec.val_smape < best) {
      best = rec.val_smape;
      result.best_index = rec.index;
      any = true;
    }
  }
  if (!any) throw DataError("all " + std::to_string(n_trials) + " search trials failed");
  return result;
}

TrialEvaluator make_training_evaluator(const data::SplitDataset& tuning_data) {
  if (tuning_data.has_test()) {
    throw ContractError("search data must not carry test views; pass SplitDataset::tuning_view()");
  }
  return [&tuning_data](const TrialConfig& config, std::uint64_t seed) {
    model::ModelConfig mc = config.model;
    mc.horizon = tuning_data.horizon;
    model::Model model(mc, seed);
    TrialOutcome outcome;
    outcome.report = train::train(model, tuning_data, config.train);
    eval::ModelForecaster forecaster(model, std::string(model::to_string(Variant::NBeats)));
    outcome.val_smape =
        eval::evaluate_model(forecaster, tuning_data, "", "", eval::Target::Validation).smape_percent;
    return outcome;
  };
}

void write_trials_csv(std::ostream& out, const SearchResult& result) {
  out << "trial,seed,input_multiplier,mlp_units,blocks_per_stack,block_variant,n_experts,top_k,"
         "output_gating,max_steps,batch_size,windows_batch_size,patience,val_smape,status\n";
  for (const auto& r : result.trials) {
    const auto& m = r.config.model;
    const auto& t = r.config.train;
    std::ostringstream score;
    score << std::setprecision(17) << r.val_smape;
    out << r.index << ',' << r.seed << ',' << m.lookback_multiplier << ',' << m.mlp_units.front() << ','
        << m.blocks_per_stack << ',' << model::to_string(m.block_variant.kind) << ','
        << m.block_variant.n_experts << ',' << m.block_variant.top_k << ','
        << (m.output_gating ? "true" : "false") << ',' << t.max_steps << ',' << t.batch_size << ','
        << t.windows_batch_size << ',' << t.patience << ',' << (r.failed ? "" : score.str()) << ','
        << (r.failed ? "failed" : "ok") << '\n';
  }
}

}  // namespace nbmoe::hpo
