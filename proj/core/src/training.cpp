#include "nbmoe/training.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>

#include "nbmoe/errors.hpp"

namespace nbmoe::train {

using num::Tensor;

std::size_t TrainConfig::decay_every() const noexcept {
  if (step_lr_every > 0) return step_lr_every;
  return std::max<std::size_t>(1, max_steps / 3);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(step_lr_gamma > 0.0 && step_lr_gamma <= 1.0)) throw ConfigError("step_lr_gamma must be in (0, 1]");
  if (max_steps == 0) throw ConfigError("max_steps must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (windows_batch_size == 0) throw ConfigError("windows_batch_size must be >= 1");
  if (patience == 0) throw ConfigError("patience must be >= 1");
  if (eval_interval == 0) throw ConfigError("eval_interval must be >= 1");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be > 0");
}

std::string TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["learning_rate"] = learning_rate;
  j["step_lr_gamma"] = step_lr_gamma;
  j["step_lr_every"] = step_lr_every;
  j["max_steps"] = max_steps;
  j["batch_size"] = batch_size;
  j["windows_batch_size"] = windows_batch_size;
  j["patience"] = patience;
  j["eval_interval"] = eval_interval;
  j["clip_norm"] = clip_norm;
  j["seed"] = seed;
  return j.dump(2);
}

TrainConfig TrainConfig::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config is not valid JSON: ") + e.what());
  }
  TrainConfig c;
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.step_lr_gamma = j.value("step_lr_gamma", c.step_lr_gamma);
    c.step_lr_every = j.value("step_lr_every", c.step_lr_every);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.windows_batch_size = j.value("windows_batch_size", c.windows_batch_size);
    c.patience = j.value("patience", c.patience);
    c.eval_interval = j.value("eval_interval", c.eval_interval);
    c.clip_norm = j.value("clip_norm", c.clip_norm);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config field has wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

std::string TrainReport::to_json() const {
  nlohmann::ordered_json j;
  j["steps_run"] = steps_run;
  j["best_val_loss"] = best_val_loss;
  j["best_step"] = best_step;
  j["val_loss_history"] = val_loss_history;
  j["stopped_early"] = stopped_early;
  j["final_lr"] = final_lr;
  j["clip_events"] = clip_events;
  return j.dump(2);
}

std::string LogRecord::to_json() const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["train_mae"] = train_mae;
  j["val_mae"] = val_mae;
  j["lr"] = lr;
  j["clipped"] = clipped;
  return j.dump();
}

num::Var mae_loss(num::Var pred, num::Var target) {
  if (!pred.value().same_shape(target.value())) {
    throw DimensionError("mae_loss: prediction and target shapes differ");
  }
  return num::mean(num::abs(num::sub(pred, target)));
}

AdamState AdamState::zeros_like(const num::ParameterSet& params) {
  AdamState s;
  for (const auto& p : params.values()) {
    s.m.emplace_back(p.rows(), p.cols());
    s.v.emplace_back(p.rows(), p.cols());
  }
  return s;
}

void adam_step(num::ParameterSet& params, const std::vector<Tensor>& grads, AdamState& state,
               double lr, const AdamHyper& hyper) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw DimensionError("adam_step: parameter, gradient and state counts differ");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!num::all_finite(grads[i])) {
      throw NumericError("adam_step: non-finite gradient for parameter " + params.name(i));
    }
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(hyper.beta1, t);
  const double bc2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    auto p = params.at(i).data();
    auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = hyper.beta1 * m[k] + (1.0 - hyper.beta1) * g[k];
      v[k] = hyper.beta2 * v[k] + (1.0 - hyper.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      p[k] -= lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
    }
  }
}

StepLr::StepLr(double lr0, double gamma, std::size_t every) : lr0_(lr0), gamma_(gamma), every_(every) {
  if (every == 0) throw ConfigError("StepLR period must be >= 1");
}

std::size_t StepLr::decays(std::size_t steps_done) const { return steps_done / every_; }

double StepLr::rate(std::size_t steps_done) const {
  return lr0_ * std::pow(gamma_, static_cast<double>(decays(steps_done)));
}

double clip_global_norm(std::vector<Tensor>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double v : g.data()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& g : grads)
      for (double& v : g.data()) v *= factor;
  }
  return norm;
}

data::WindowBatch validation_windows(const data::SplitDataset& data, std::size_t lookback) {
  const std::size_t h = data.horizon;
  std::size_t n = 0;
  for (const auto& s : data.series)
    if (s.train.size() >= lookback && s.val.size() == h) ++n;
  data::WindowBatch batch{Tensor(n, lookback), Tensor(n, h), {}, {}};
  std::size_t row = 0;
  for (const auto& s : data.series) {
    if (s.train.size() < lookback || s.val.size() != h) continue;
    const std::size_t start = s.train.size() - lookback;
    for (std::size_t t = 0; t < lookback; ++t) batch.inputs(row, t) = s.train[start + t];
    for (std::size_t t = 0; t < h; ++t) batch.targets(row, t) = s.val[t];
    batch.series_ids.push_back(s.id);
    batch.starts.push_back(start);
    ++row;
  }
  return batch;
}

double validation_loss(const model::Model& model, const data::SplitDataset& data) {
  const auto batch = validation_windows(data, model.config().lookback());
  if (batch.inputs.rows() == 0) throw ConfigError("no series has a validation window");
  const Tensor forecast = model.predict(batch.inputs).forecast;
  double total = 0.0;
  for (std::size_t i = 0; i < forecast.size(); ++i)
    total += std::abs(forecast.data()[i] - batch.targets.data()[i]);
  const double loss = total / static_cast<double>(forecast.size());
  if (!std::isfinite(loss)) throw NumericError("validation loss is not finite");
  return loss;
}

TrainReport train(model::Model& model, const data::SplitDataset& data, const TrainConfig& config,
                  const LogSink& log) {
  config.validate();
  const std::size_t lookback = model.config().lookback();
  const std::size_t horizon = model.config().horizon;
  if (data.horizon != horizon) {
    throw ConfigError("dataset horizon " + std::to_string(data.horizon) + " != model horizon " +
                      std::to_string(horizon));
  }
  if (validation_windows(data, lookback).inputs.rows() == 0) {
    throw ConfigError("no series has a validation window for L=" + std::to_string(lookback));
  }

  data::WindowSampler sampler(data, lookback, horizon, config.windows_batch_size, config.batch_size,
                              config.seed ^ 0x5eedULL);
  const StepLr schedule(config.learning_rate, config.step_lr_gamma, config.decay_every());
  num::ParameterSet& params = model.parameters();
  AdamState adam = AdamState::zeros_like(params);

  TrainReport report;
  report.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best_snapshot = params.values();
  std::size_t since_improvement = 0;
  double train_loss_acc = 0.0;
  std::size_t train_loss_count = 0;
  std::size_t clipped_since_log = 0;

  try {
    for (std::size_t step = 0; step < config.max_steps; ++step) {
      const double lr = schedule.rate(step);
      const data::WindowBatch batch = sampler.next();

      num::Tape tape;
      num::BoundParameters bound(tape, params);
      const model::ForecastGraph graph = model.forward(bound, tape.constant(batch.inputs));
      num::Var loss = mae_loss(graph.forecast, tape.constant(batch.targets));
      tape.backward(loss);
      std::vector<Tensor> grads = bound.gradients();
      if (clip_global_norm(grads, config.clip_norm) > config.clip_norm) {
        ++report.clip_events;
        ++clipped_since_log;
      }
      adam_step(params, grads, adam, lr);

      train_loss_acc += loss.value()(0, 0);
      ++train_loss_count;
      report.steps_run = step + 1;

      if (report.steps_run % config.eval_interval != 0 && report.steps_run != config.max_steps) continue;

      const double val = validation_loss(model, data);
      report.val_loss_history.push_back(val);
      if (log) {
        log(LogRecord{report.steps_run, train_loss_acc / static_cast<double>(train_loss_count), val,
                      lr, clipped_since_log});
      }
      train_loss_acc = 0.0;
      train_loss_count = 0;
      clipped_since_log = 0;

      if (val < report.best_val_loss) {
        report.best_val_loss = val;
        report.best_step = report.steps_run;
        best_snapshot = params.values();
        since_improvement = 0;
      } else if (++since_improvement >= config.patience) {
        report.stopped_early = true;
        break;
      }
    }
  } catch (const NumericError& e) {
    params.values() = best_snapshot;
    throw DivergenceError(std::string("training diverged at step ") +
                          std::to_string(report.steps_run + 1) + ": " + e.what());
  }

  params.values() = best_snapshot;
  report.final_lr = schedule.rate(report.steps_run);
  return report;
}

}  // namespace nbmoe::train
