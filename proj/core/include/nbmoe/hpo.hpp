#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nbmoe/data.hpp"
#include "nbmoe/model.hpp"
#include "nbmoe/training.hpp"

namespace nbmoe::hpo {

/// Discrete grids searched per trial. `defaults` gives the full grids;
/// every list may be narrowed for desk-scale runs.
struct SearchSpace {
  std::vector<std::size_t> input_multipliers{1, 2, 3, 4, 5};
  std::vector<std::size_t> mlp_exponents{2, 3, 4, 5, 6, 7, 8, 9};  // units [2^i, 2^i]
  std::vector<std::size_t> blocks_per_stack{1, 3, 6, 9};
  std::vector<std::size_t> n_experts{2, 4, 8};
  std::vector<std::size_t> top_k{1, 2, 4, 8};
  std::vector<std::size_t> max_steps{1000, 2500, 5000, 10000};
  std::vector<std::size_t> batch_sizes{32, 64, 128, 256};
  std::vector<std::size_t> windows_batch_sizes{128, 256, 512, 1024};
  std::vector<std::size_t> patience{10, 20};

  // Plain N-BEATS additionally searches 2^10 units.
  static SearchSpace defaults(model::Variant variant);
  void validate(model::Variant variant) const;
  std::string to_json() const;
  static SearchSpace from_json(std::string_view text, model::Variant variant);
};

struct TrialConfig {
  model::ModelConfig model;
  train::TrainConfig train;
};

struct TrialOutcome {
  double val_smape = 0.0;
  std::optional<train::TrainReport> report;
};

struct TrialRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  TrialConfig config;
  double val_smape = 0.0;
  std::optional<train::TrainReport> report;
  bool failed = false;
  std::string failure;
};

struct SearchResult {
  std::vector<TrialRecord> trials;
  std::size_t best_index = 0;

  const TrialRecord& best() const { return trials.at(best_index); }
};

using TrialEvaluator = std::function<TrialOutcome(const TrialConfig&, std::uint64_t seed)>;

// Samples n configurations uniformly from the grids (seeded). Expert fields
// are zeroed for nbeats / nbeats-moe; top_k > n_experts draws are resampled.
std::vector<TrialConfig> sample_configs(const SearchSpace& space, model::Variant variant,
                                        const model::ModelConfig& base_model,
                                        const train::TrainConfig& base_train, std::size_t n_trials,
                                        std::uint64_t seed);

/// Runs n_trials sampled configurations; trial i uses seed base_seed + i.
/// Exceptions inside a trial mark it failed. Throws DataError when every
/// trial fails. `threads` > 1 evaluates trials concurrently; records are
/// merged by trial index.
SearchResult run_search(const SearchSpace& space, model::Variant variant,
                        const model::ModelConfig& base_model, const train::TrainConfig& base_train,
                        std::size_t n_trials, std::uint64_t seed, const TrialEvaluator& evaluate,
                        std::size_t threads = 1);

// Trains on the train views and scores validation SMAPE. The dataset must
// not carry test views (use SplitDataset::tuning_view()).
TrialEvaluator make_training_evaluator(const data::SplitDataset& tuning_data);

// One row per trial with the flattened configuration and score.
void write_trials_csv(std::ostream& out, const SearchResult& result);

}  // namespace nbmoe::hpo
