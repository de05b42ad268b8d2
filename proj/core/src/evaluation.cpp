#include "nbmoe/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>

#include "nbmoe/errors.hpp"

namespace nbmoe::eval {

double smape(std::span<const double> actual, std::span<const double> forecast) {
  if (actual.size() != forecast.size()) {
    throw DimensionError("smape: actual has " + std::to_string(actual.size()) +
                         " values, forecast has " + std::to_string(forecast.size()));
  }
  if (actual.empty()) throw DimensionError("smape: horizon must be >= 1");
  double total = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double denom = std::abs(actual[i]) + std::abs(forecast[i]);
    if (denom == 0.0) continue;
    total += std::abs(actual[i] - forecast[i]) / denom;
  }
  return 200.0 * total / static_cast<double>(actual.size());
}

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<std::optional<std::vector<double>>> SeasonalNaiveForecaster::forecast(
    const std::vector<std::vector<double>>& histories, std::size_t horizon) const {
  std::vector<std::optional<std::vector<double>>> out;
  out.reserve(histories.size());
  for (const auto& h : histories) {
    if (h.size() < period_) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(data::seasonal_naive(h, horizon, period_));
    }
  }
  return out;
}

std::vector<std::optional<std::vector<double>>> ModelForecaster::forecast(
    const std::vector<std::vector<double>>& histories, std::size_t horizon) const {
  const auto& cfg = model_->config();
  if (horizon != cfg.horizon) {
    throw ConfigError("model horizon " + std::to_string(cfg.horizon) + " != requested " +
                      std::to_string(horizon));
  }
  const std::size_t lookback = cfg.lookback();
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < histories.size(); ++i)
    if (histories[i].size() >= lookback) usable.push_back(i);

  std::vector<std::optional<std::vector<double>>> out(histories.size());
  if (usable.empty()) return out;
  num::Tensor inputs(usable.size(), lookback);
  for (std::size_t r = 0; r < usable.size(); ++r) {
    const auto& h = histories[usable[r]];
    std::copy(h.end() - static_cast<std::ptrdiff_t>(lookback), h.end(), inputs.row(r).begin());
  }
  const num::Tensor f = model_->predict(inputs).forecast;
  for (std::size_t r = 0; r < usable.size(); ++r)
    out[usable[r]] = std::vector<double>(f.row(r).begin(), f.row(r).end());
  return out;
}

EvalResult evaluate_model(const Forecaster& forecaster, const data::SplitDataset& data,
                          const std::string& dataset, const std::string& frequency, Target target) {
  std::vector<std::vector<double>> histories;
  std::vector<const std::vector<double>*> actuals;
  for (const auto& s : data.series) {
    if (target == Target::Test) {
      if (s.test.size() != data.horizon) throw DataError("series " + s.id + " has no test window");
      histories.push_back(s.history());
      actuals.push_back(&s.test);
    } else {
      histories.push_back(s.train);
      actuals.push_back(&s.val);
    }
  }
  const auto forecasts = forecaster.forecast(histories, data.horizon);

  EvalResult result{dataset, frequency, forecaster.name(), 0.0, {}, 0, {}};
  double total = 0.0;
  for (std::size_t i = 0; i < data.series.size(); ++i) {
    if (!forecasts[i]) {
      result.excluded.push_back(data.series[i].id);
      continue;
    }
    const double s = smape(*actuals[i], *forecasts[i]);
    result.per_series_smape[data.series[i].id] = s;
    total += s;
  }
  result.n_series = result.per_series_smape.size();
  if (result.n_series == 0) throw DataError("no series could be evaluated for " + forecaster.name());
  result.smape_percent = total / static_cast<double>(result.n_series);
  return result;
}

std::vector<ResultRow> with_median_rows(std::vector<ResultRow> rows) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<double>> groups;
  for (const auto& r : rows) {
    if (r.seed == "median") continue;
    Key k{r.dataset, r.frequency, r.model};
    if (!groups.contains(k)) order.push_back(k);
    groups[k].push_back(r.smape);
  }
  for (const auto& k : order) {
    rows.push_back(ResultRow{std::get<0>(k), std::get<1>(k), std::get<2>(k), "median", median(groups[k])});
  }
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "dataset,frequency,model,seed,smape\n";
  std::ostringstream num;
  for (const auto& r : rows) {
    num.str("");
    num << std::setprecision(17) << r.smape;
    out << r.dataset << ',' << r.frequency << ',' << r.model << ',' << r.seed << ',' << num.str() << '\n';
  }
}

std::string markdown_table(const std::vector<TableCell>& cells) {
  std::vector<std::string> models;
  std::vector<std::pair<std::string, std::string>> rows;
  std::map<std::pair<std::string, std::string>, std::map<std::string, double>> grid;
  for (const auto& c : cells) {
    if (std::find(models.begin(), models.end(), c.model) == models.end()) models.push_back(c.model);
    std::pair<std::string, std::string> key{c.dataset, c.frequency_label};
    if (!grid.contains(key)) rows.push_back(key);
    grid[key][c.model] = c.smape;
  }

  std::ostringstream md;
  md << "| Dataset | Freq./H. |";
  for (const auto& m : models) md << ' ' << m << " |";
  md << "\n|---|---|";
  for (std::size_t i = 0; i < models.size(); ++i) md << "---:|";
  md << '\n';
  for (const auto& key : rows) {
    const auto& scores = grid[key];
    std::set<double> distinct;
    for (const auto& [m, v] : scores) distinct.insert(v);
    auto it = distinct.begin();
    const std::optional<double> best = it != distinct.end() ? std::optional(*it) : std::nullopt;
    const std::optional<double> second =
        distinct.size() > 1 ? std::optional(*std::next(it)) : std::nullopt;
    md << "| " << key.first << " | " << key.second << " |";
    for (const auto& m : models) {
      auto f = scores.find(m);
      if (f == scores.end()) {
        md << " - |";
        continue;
      }
      std::ostringstream v;
      v << std::fixed << std::setprecision(2) << f->second;
      if (best && f->second == *best) {
        md << " **" << v.str() << "** |";
      } else if (second && f->second == *second) {
        md << " _" << v.str() << "_ |";
      } else {
        md << ' ' << v.str() << " |";
      }
    }
    md << '\n';
  }
  md << "\nBold: best per row. Italic: second best.\n";
  return md.str();
}

}  // namespace nbmoe::eval
