#pragma once

#include <array>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nbmoe/data.hpp"
#include "nbmoe/model.hpp"
#include "nbmoe/stl.hpp"

namespace nbmoe::analysis {

enum class Component { Trend = 0, Seasonal = 1, Residual = 2 };
inline constexpr std::array<Component, 3> kComponents{Component::Trend, Component::Seasonal,
                                                      Component::Residual};
std::string_view to_string(Component c);

/// Share of series for which each stack received the highest stack-level
/// gate weight, per STL component. Columns follow the model's stack order
/// (identity, trend, seasonality for the canonical configuration).
struct SpecializationTable {
  std::string dataset;
  std::vector<std::string> stack_names;
  std::array<std::vector<double>, 3> ratios;       // [component][stack]
  std::array<std::vector<std::size_t>, 3> counts;  // [component][stack]
  std::size_t n_series = 0;
  std::vector<std::string> skipped;

  const std::vector<double>& row(Component c) const { return ratios[static_cast<std::size_t>(c)]; }
};

// Stack-level argmax of the gate for one input window; ties go to the
// lowest stack index.
std::size_t selected_stack(const model::Model& model, std::span<const double> window);

/// For each series: STL-decompose, feed the last L values of each component
/// (raw, level not re-added) to the gate, and record the winning stack.
/// Requires an output-gated model with identity/trend/seasonality stacks.
/// Series too short for STL or for the lookback are skipped and listed.
SpecializationTable measure_specialization(const model::Model& model,
                                           std::span<const data::TimeSeries> series,
                                           std::size_t period, const std::string& dataset,
                                           const StlConfig& stl = {});

// dataset,component,identity,trend,seasonal
void write_specialization_csv(std::ostream& out, const std::vector<SpecializationTable>& tables);

struct DecompositionExport {
  std::string series_id;
  std::vector<std::string> stack_names;
  std::vector<double> actual;
  std::vector<double> forecast;
  std::vector<std::vector<double>> stack_contributions;  // [stack][step]
  std::vector<double> gate_weights;                      // per stack
  double smape = 0.0;

  std::string to_json() const;
  // step,actual,forecast,stack_1..stack_S
  void write_csv(std::ostream& out) const;
};

// Forecasts `actual` from the last L values of `history` and exports the
// gate-weighted per-stack contributions.
DecompositionExport export_decomposition(const model::Model& model, const std::string& series_id,
                                         std::span<const double> history,
                                         std::span<const double> actual);

}  // namespace nbmoe::analysis
