#include "nbmoe/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "nbmoe/errors.hpp"
#include "nbmoe/parameters.hpp"

namespace nbmoe::data {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  out.push_back(trim(field));
  return out;
}

std::optional<long long> parse_integer(const std::string& s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;
  return v;
}

std::uint64_t next_index(std::uint64_t& rng, std::size_t bound) {
  return num::splitmix64(rng) % bound;
}

}  // namespace

std::string_view to_string(Frequency f) {
  switch (f) {
    case Frequency::Monthly: return "monthly";
    case Frequency::Quarterly: return "quarterly";
    case Frequency::Yearly: return "yearly";
  }
  return "unknown";
}

Frequency frequency_from_string(std::string_view name) {
  if (name == "monthly") return Frequency::Monthly;
  if (name == "quarterly") return Frequency::Quarterly;
  if (name == "yearly") return Frequency::Yearly;
  throw ConfigError("unknown frequency: " + std::string(name));
}

std::size_t default_period(Frequency f) {
  switch (f) {
    case Frequency::Monthly: return 12;
    case Frequency::Quarterly: return 4;
    case Frequency::Yearly: return 1;
  }
  return 1;
}

std::optional<std::size_t> competition_horizon(std::string_view dataset, Frequency f) {
  const int fi = static_cast<int>(f);  // monthly, quarterly, yearly
  if (dataset == "M1") return std::array<std::size_t, 3>{8, 2, 2}[fi];
  if (dataset == "Tourism") return std::array<std::size_t, 3>{18, 8, 4}[fi];
  if (dataset == "M3" || dataset == "M4") return std::array<std::size_t, 3>{18, 8, 6}[fi];
  return std::nullopt;
}

DatasetManifest DatasetManifest::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("manifest is not valid JSON: ") + e.what());
  }
  DatasetManifest m;
  try {
    m.name = j.at("name").get<std::string>();
    m.frequency = frequency_from_string(j.at("frequency").get<std::string>());
    m.period = j.value("period", default_period(m.frequency));
    if (j.contains("horizon")) {
      m.horizon = j["horizon"].get<std::size_t>();
    } else if (auto h = competition_horizon(m.name, m.frequency)) {
      m.horizon = *h;
    } else {
      throw ConfigError("manifest field 'horizon' is required for dataset " + m.name);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest field missing or mistyped: ") + e.what());
  }
  if (m.period == 0) throw ConfigError("manifest field 'period' must be >= 1");
  if (m.horizon == 0) throw ConfigError("manifest field 'horizon' must be >= 1");
  return m;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

std::string DatasetManifest::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["frequency"] = std::string(data::to_string(frequency));
  j["period"] = period;
  j["horizon"] = horizon;
  return j.dump(2);
}

std::vector<TimeSeries> parse_long_csv(std::istream& in, std::size_t period) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV is empty");
  const auto header = split_fields(line);
  auto col = [&](std::string_view name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("CSV missing required column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_col = col("unique_id"), ds_col = col("ds"), y_col = col("y");
  const std::size_t needed = std::max({id_col, ds_col, y_col}) + 1;

  struct Row {
    std::string ds;
    double y;
    std::size_t line;
  };
  std::map<std::string, std::vector<Row>> by_id;
  std::size_t line_no = 1;
  bool all_integer = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() < needed) {
      throw DataError("line " + std::to_string(line_no) + ": expected at least " +
                      std::to_string(needed) + " fields");
    }
    auto y = parse_double(fields[y_col]);
    if (!y || !std::isfinite(*y)) {
      throw DataError("line " + std::to_string(line_no) + ": non-numeric y value '" +
                      fields[y_col] + "'");
    }
    if (fields[id_col].empty()) throw DataError("line " + std::to_string(line_no) + ": empty unique_id");
    all_integer = all_integer && parse_integer(fields[ds_col]).has_value();
    by_id[fields[id_col]].push_back(Row{fields[ds_col], *y, line_no});
  }

  std::vector<TimeSeries> out;
  for (auto& [id, rows] : by_id) {
    auto less = [all_integer](const Row& a, const Row& b) {
      if (all_integer) return *parse_integer(a.ds) < *parse_integer(b.ds);
      return a.ds < b.ds;
    };
    std::stable_sort(rows.begin(), rows.end(), less);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (!less(rows[i - 1], rows[i])) {
        throw DataError("line " + std::to_string(rows[i].line) + ": duplicate key (" + id + ", " +
                        rows[i].ds + ")");
      }
    }
    TimeSeries ts;
    ts.id = id;
    ts.period = period;
    for (const auto& r : rows) ts.values.push_back(r.y);
    out.push_back(std::move(ts));
  }
  return out;
}

std::vector<TimeSeries> load_long_csv(const std::filesystem::path& path, std::size_t period) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read data file " + path.string());
  return parse_long_csv(in, period);
}

void write_long_csv(std::ostream& out, std::span<const TimeSeries> series) {
  out << "unique_id,ds,y\n";
  out.precision(17);
  for (const auto& s : series)
    for (std::size_t t = 0; t < s.values.size(); ++t) out << s.id << ',' << t << ',' << s.values[t] << '\n';
}

std::vector<double> SeriesSplit::history() const {
  std::vector<double> out = train;
  out.insert(out.end(), val.begin(), val.end());
  return out;
}

std::vector<double> SeriesSplit::reassemble() const {
  std::vector<double> out = history();
  out.insert(out.end(), test.begin(), test.end());
  return out;
}

SplitDataset SplitDataset::tuning_view() const {
  SplitDataset out = *this;
  for (auto& s : out.series) s.test.clear();
  return out;
}

bool SplitDataset::has_test() const noexcept {
  return std::any_of(series.begin(), series.end(), [](const SeriesSplit& s) { return !s.test.empty(); });
}

SplitDataset split(std::span<const TimeSeries> series, std::size_t horizon) {
  if (horizon == 0) throw ConfigError("horizon must be >= 1");
  SplitDataset out;
  out.horizon = horizon;
  for (const auto& s : series) {
    if (s.values.size() < 2 * horizon + 1) {
      out.skipped.push_back(s.id);
      continue;
    }
    const std::size_t n_train = s.values.size() - 2 * horizon;
    SeriesSplit sp;
    sp.id = s.id;
    sp.period = s.period;
    sp.train.assign(s.values.begin(), s.values.begin() + n_train);
    sp.val.assign(s.values.begin() + n_train, s.values.begin() + n_train + horizon);
    sp.test.assign(s.values.begin() + n_train + horizon, s.values.end());
    out.series.push_back(std::move(sp));
  }
  return out;
}

std::size_t window_count(std::size_t n, std::size_t lookback, std::size_t horizon) {
  return n >= lookback + horizon ? n - lookback - horizon + 1 : 0;
}

WindowSampler::WindowSampler(const SplitDataset& data, std::size_t lookback, std::size_t horizon,
                             std::size_t windows_per_batch, std::size_t series_per_batch,
                             std::uint64_t seed)
    : data_(&data),
      lookback_(lookback),
      horizon_(horizon),
      windows_per_batch_(windows_per_batch),
      series_per_batch_(series_per_batch),
      rng_(seed) {
  if (lookback == 0 || horizon == 0 || windows_per_batch == 0)
    throw ConfigError("window sampler needs positive L, H and batch size");
  for (std::size_t i = 0; i < data.series.size(); ++i)
    if (window_count(data.series[i].train.size(), lookback, horizon) > 0) eligible_.push_back(i);
  if (eligible_.empty()) {
    throw ConfigError("no series has a training window for L=" + std::to_string(lookback) +
                      ", H=" + std::to_string(horizon));
  }
}

WindowBatch WindowSampler::next() {
  // Series subset: partial Fisher-Yates over the eligible list.
  std::vector<std::size_t> chosen = eligible_;
  std::size_t n_chosen = chosen.size();
  if (series_per_batch_ > 0 && series_per_batch_ < chosen.size()) {
    for (std::size_t i = 0; i < series_per_batch_; ++i) {
      const std::size_t j = i + next_index(rng_, chosen.size() - i);
      std::swap(chosen[i], chosen[j]);
    }
    n_chosen = series_per_batch_;
    std::sort(chosen.begin(), chosen.begin() + static_cast<std::ptrdiff_t>(n_chosen));
  }

  std::vector<std::size_t> cumulative(n_chosen);
  std::size_t total = 0;
  for (std::size_t i = 0; i < n_chosen; ++i) {
    total += window_count(data_->series[chosen[i]].train.size(), lookback_, horizon_);
    cumulative[i] = total;
  }

  WindowBatch batch{num::Tensor(windows_per_batch_, lookback_), num::Tensor(windows_per_batch_, horizon_), {}, {}};
  for (std::size_t b = 0; b < windows_per_batch_; ++b) {
    const std::size_t flat = next_index(rng_, total);
    const std::size_t k = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), flat) - cumulative.begin());
    const std::size_t start = flat - (k == 0 ? 0 : cumulative[k - 1]);
    const SeriesSplit& s = data_->series[chosen[k]];
    for (std::size_t t = 0; t < lookback_; ++t) batch.inputs(b, t) = s.train[start + t];
    for (std::size_t t = 0; t < horizon_; ++t) batch.targets(b, t) = s.train[start + lookback_ + t];
    batch.series_ids.push_back(s.id);
    batch.starts.push_back(start);
  }
  return batch;
}

WindowBatch make_all_windows(const SplitDataset& data, std::size_t lookback, std::size_t horizon) {
  std::size_t total = 0;
  for (const auto& s : data.series) total += window_count(s.train.size(), lookback, horizon);
  WindowBatch batch{num::Tensor(total, lookback), num::Tensor(total, horizon), {}, {}};
  std::size_t row = 0;
  for (const auto& s : data.series) {
    const std::size_t n = window_count(s.train.size(), lookback, horizon);
    for (std::size_t start = 0; start < n; ++start, ++row) {
      for (std::size_t t = 0; t < lookback; ++t) batch.inputs(row, t) = s.train[start + t];
      for (std::size_t t = 0; t < horizon; ++t) batch.targets(row, t) = s.train[start + lookback + t];
      batch.series_ids.push_back(s.id);
      batch.starts.push_back(start);
    }
  }
  return batch;
}

std::vector<double> seasonal_naive(std::span<const double> train, std::size_t horizon,
                                   std::size_t period) {
  if (period == 0) throw ConfigError("seasonal period must be >= 1");
  if (train.size() < period) {
    throw DataError("seasonal naive needs at least one full season (" + std::to_string(period) +
                    " observations), got " + std::to_string(train.size()));
  }
  const std::size_t season_start = train.size() - period;
  std::vector<double> out(horizon);
  for (std::size_t h = 0; h < horizon; ++h) out[h] = train[season_start + h % period];
  return out;
}

}  // namespace nbmoe::data
