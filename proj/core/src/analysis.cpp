#include "nbmoe/analysis.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "nbmoe/errors.hpp"
#include "nbmoe/evaluation.hpp"

namespace nbmoe::analysis {

namespace {

void require_canonical_gated(const model::Model& model) {
  const auto& cfg = model.config();
  if (!cfg.output_gating) {
    throw ConfigError(
        "specialization analysis needs an output-gated model (variant nbeats-moe); this "
        "checkpoint has no gate");
  }
  const std::vector<basis::StackType> canonical{basis::StackType::Identity, basis::StackType::Trend,
                                                basis::StackType::Seasonality};
  if (cfg.stack_types != canonical) {
    throw ConfigError("specialization analysis needs stacks [identity, trend, seasonality]");
  }
}

std::vector<std::string> stack_names(const model::ModelConfig& cfg) {
  std::vector<std::string> out;
  for (auto s : cfg.stack_types) out.emplace_back(basis::to_string(s));
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string_view to_string(Component c) {
  switch (c) {
    case Component::Trend: return "trend";
    case Component::Seasonal: return "seasonal";
    case Component::Residual: return "residual";
  }
  return "unknown";
}

std::size_t selected_stack(const model::Model& model, std::span<const double> window) {
  const auto& cfg = model.config();
  const model::GateWeights gate = model.gate(num::Tensor::row_vector(window));
  model::ForecastBundle holder;
  holder.gate = gate;
  const num::Tensor stacks = holder.stack_gate_weights(cfg.blocks_per_stack);
  std::size_t best = 0;
  for (std::size_t s = 1; s < stacks.cols(); ++s)
    if (stacks(0, s) > stacks(0, best)) best = s;
  return best;
}

SpecializationTable measure_specialization(const model::Model& model,
                                           std::span<const data::TimeSeries> series,
                                           std::size_t period, const std::string& dataset,
                                           const StlConfig& stl) {
  require_canonical_gated(model);
  const auto& cfg = model.config();
  const std::size_t lookback = cfg.lookback();
  const std::size_t n_stacks = cfg.stack_types.size();

  SpecializationTable table;
  table.dataset = dataset;
  table.stack_names = stack_names(cfg);
  for (auto& c : table.counts) c.assign(n_stacks, 0);

  const std::size_t min_len = period == 1 ? 3 : 2 * period + 1;
  for (const auto& s : series) {
    if (s.values.size() < lookback || s.values.size() < min_len) {
      table.skipped.push_back(s.id);
      continue;
    }
    const StlComponents parts = stl_decompose(s.values, period, stl);
    const std::array<const std::vector<double>*, 3> comps{&parts.trend, &parts.seasonal, &parts.residual};
    for (std::size_t c = 0; c < comps.size(); ++c) {
      std::span<const double> full(*comps[c]);
      ++table.counts[c][selected_stack(model, full.subspan(full.size() - lookback))];
    }
    ++table.n_series;
  }
  for (std::size_t c = 0; c < 3; ++c) {
    table.ratios[c].assign(n_stacks, 0.0);
    if (table.n_series == 0) continue;
    for (std::size_t k = 0; k < n_stacks; ++k)
      table.ratios[c][k] = static_cast<double>(table.counts[c][k]) / static_cast<double>(table.n_series);
  }
  return table;
}

void write_specialization_csv(std::ostream& out, const std::vector<SpecializationTable>& tables) {
  out << "dataset,component,identity,trend,seasonal\n";
  for (const auto& t : tables) {
    for (auto c : kComponents) {
      out << t.dataset << ',' << to_string(c);
      for (double r : t.row(c)) out << ',' << fmt(r);
      out << '\n';
    }
  }
}

std::string DecompositionExport::to_json() const {
  nlohmann::ordered_json j;
  j["series_id"] = series_id;
  j["stacks"] = stack_names;
  j["gate_weights"] = gate_weights;
  j["actual"] = actual;
  j["forecast"] = forecast;
  nlohmann::ordered_json contrib = nlohmann::ordered_json::object();
  for (std::size_t s = 0; s < stack_names.size(); ++s) contrib[stack_names[s]] = stack_contributions[s];
  j["stack_contributions"] = contrib;
  j["smape"] = smape;
  return j.dump(2);
}

void DecompositionExport::write_csv(std::ostream& out) const {
  out << "step,actual,forecast";
  for (std::size_t s = 0; s < stack_contributions.size(); ++s) out << ",stack_" << s + 1;
  out << '\n';
  for (std::size_t t = 0; t < forecast.size(); ++t) {
    out << t + 1 << ',' << fmt(actual[t]) << ',' << fmt(forecast[t]);
    for (const auto& c : stack_contributions) out << ',' << fmt(c[t]);
    out << '\n';
  }
}

DecompositionExport export_decomposition(const model::Model& model, const std::string& series_id,
                                         std::span<const double> history,
                                         std::span<const double> actual) {
  const auto& cfg = model.config();
  if (!cfg.output_gating) {
    throw ConfigError("decomposition export needs an output-gated model (variant nbeats-moe)");
  }
  const std::size_t lookback = cfg.lookback();
  if (history.size() < lookback) {
    throw DataError("series " + series_id + " is shorter than the lookback window");
  }
  if (actual.size() != cfg.horizon) throw DimensionError("actual window length != horizon");

  const auto bundle = model.predict(num::Tensor::row_vector(history.subspan(history.size() - lookback)));
  DecompositionExport out;
  out.series_id = series_id;
  out.stack_names = stack_names(cfg);
  out.actual.assign(actual.begin(), actual.end());
  out.forecast.assign(bundle.forecast.row(0).begin(), bundle.forecast.row(0).end());
  for (const auto& s : bundle.stack_forecasts)
    out.stack_contributions.emplace_back(s.row(0).begin(), s.row(0).end());
  const num::Tensor gates = bundle.stack_gate_weights(cfg.blocks_per_stack);
  out.gate_weights.assign(gates.row(0).begin(), gates.row(0).end());
  out.smape = eval::smape(actual, out.forecast);
  return out;
}

}  // namespace nbmoe::analysis
