#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nbmoe/data.hpp"
#include "nbmoe/model.hpp"

namespace nbmoe::eval {

/// SMAPE in percent (M-competition convention):
///   200 / H * sum |y - f| / (|y| + |f|)
/// Terms with a zero denominator contribute 0. Result lies in [0, 200].
double smape(std::span<const double> actual, std::span<const double> forecast);

double median(std::vector<double> values);

/// Produces H-step forecasts from series histories. A nullopt entry means
/// the history is too short for this forecaster.
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual std::string name() const = 0;
  virtual std::vector<std::optional<std::vector<double>>> forecast(
      const std::vector<std::vector<double>>& histories, std::size_t horizon) const = 0;
};

class SeasonalNaiveForecaster final : public Forecaster {
 public:
  explicit SeasonalNaiveForecaster(std::size_t period) : period_(period) {}
  std::string name() const override { return "seasonal-naive"; }
  std::vector<std::optional<std::vector<double>>> forecast(
      const std::vector<std::vector<double>>& histories, std::size_t horizon) const override;

 private:
  std::size_t period_;
};

// Batched forward pass over the last L values of every history.
class ModelForecaster final : public Forecaster {
 public:
  ModelForecaster(const model::Model& model, std::string name) : model_(&model), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  std::vector<std::optional<std::vector<double>>> forecast(
      const std::vector<std::vector<double>>& histories, std::size_t horizon) const override;

 private:
  const model::Model* model_;
  std::string name_;
};

struct EvalResult {
  std::string dataset;
  std::string frequency;
  std::string model;
  double smape_percent = 0.0;
  std::map<std::string, double> per_series_smape;
  std::size_t n_series = 0;
  std::vector<std::string> excluded;
};

enum class Target { Validation, Test };

// Forecasts the test (or validation) window of every series from the data
// preceding it and averages per-series SMAPE with equal weights.
EvalResult evaluate_model(const Forecaster& forecaster, const data::SplitDataset& data,
                          const std::string& dataset, const std::string& frequency,
                          Target target = Target::Test);

struct ResultRow {
  std::string dataset;
  std::string frequency;
  std::string model;
  std::string seed;  // seed number or "median"
  double smape = 0.0;
};

// Per-seed rows followed by one "median" row per (dataset, frequency, model).
std::vector<ResultRow> with_median_rows(std::vector<ResultRow> rows);
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);

/// Markdown table laid out like the competition results: one row per
/// (dataset, frequency/horizon), one column per model. The best score in a
/// row is bold, the second best italic.
struct TableCell {
  std::string dataset;
  std::string frequency_label;  // e.g. "Monthly/18"
  std::string model;
  double smape = 0.0;
};
std::string markdown_table(const std::vector<TableCell>& cells);

}  // namespace nbmoe::eval
