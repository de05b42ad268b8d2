#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nbmoe/autodiff.hpp"
#include "nbmoe/data.hpp"
#include "nbmoe/model.hpp"
#include "nbmoe/parameters.hpp"

namespace nbmoe::train {

struct TrainConfig {
  double learning_rate = 1e-3;
  double step_lr_gamma = 0.5;
  std::size_t step_lr_every = 0;  // 0: max_steps / 3
  std::size_t max_steps = 1000;
  std::size_t batch_size = 32;           // series per batch
  std::size_t windows_batch_size = 128;  // windows per batch
  std::size_t patience = 10;             // evaluations without improvement
  std::size_t eval_interval = 50;
  double clip_norm = 10.0;
  std::uint64_t seed = 0;

  std::size_t decay_every() const noexcept;
  void validate() const;
  std::string to_json() const;
  static TrainConfig from_json(std::string_view text);
};

struct TrainReport {
  std::size_t steps_run = 0;
  double best_val_loss = 0.0;
  std::size_t best_step = 0;
  std::vector<double> val_loss_history;
  bool stopped_early = false;
  double final_lr = 0.0;
  std::size_t clip_events = 0;

  std::string to_json() const;
};

struct LogRecord {
  std::size_t step = 0;
  double train_mae = 0.0;
  double val_mae = 0.0;
  double lr = 0.0;
  std::size_t clipped = 0;  // clip activations since the previous record

  std::string to_json() const;  // one NDJSON line, no trailing newline
};

using LogSink = std::function<void(const LogRecord&)>;

// Mean absolute error over all elements; subgradient 0 at exact ties.
num::Var mae_loss(num::Var pred, num::Var target);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<num::Tensor> m;
  std::vector<num::Tensor> v;
  std::size_t step = 0;

  static AdamState zeros_like(const num::ParameterSet& params);
};

// Bias-corrected Adam update in place. A non-finite gradient throws
// NumericError before anything is modified.
void adam_step(num::ParameterSet& params, const std::vector<num::Tensor>& grads, AdamState& state,
               double lr, const AdamHyper& hyper = {});

/// StepLR: lr(step) = lr0 * gamma^floor(step / every).
class StepLr {
 public:
  StepLr(double lr0, double gamma, std::size_t every);
  double rate(std::size_t steps_done) const;
  std::size_t decays(std::size_t steps_done) const;

 private:
  double lr0_;
  double gamma_;
  std::size_t every_;
};

// Scales all gradients so their joint L2 norm is at most max_norm; returns
// the pre-clip norm.
double clip_global_norm(std::vector<num::Tensor>& grads, double max_norm);

// Validation windows: last L of train -> val. Series with train < L are
// left out.
data::WindowBatch validation_windows(const data::SplitDataset& data, std::size_t lookback);

// Validation MAE of the model's current parameters.
double validation_loss(const model::Model& model, const data::SplitDataset& data);

/// Trains `model` in place on the train views with MAE + Adam + StepLR.
///
/// Validation MAE is computed every eval_interval steps (and after the last
/// step); training stops after `patience` evaluations without improvement.
/// On return the model holds the best-validation snapshot. A non-finite
/// loss restores that snapshot and throws DivergenceError.
TrainReport train(model::Model& model, const data::SplitDataset& data, const TrainConfig& config,
                  const LogSink& log = {});

}  // namespace nbmoe::train
