#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nbmoe/tensor.hpp"

namespace nbmoe::data {

struct TimeSeries {
  std::string id;
  std::vector<double> values;
  std::size_t period = 1;
  std::optional<std::string> domain_tag;
};

enum class Frequency { Monthly, Quarterly, Yearly };

std::string_view to_string(Frequency f);
Frequency frequency_from_string(std::string_view name);
std::size_t default_period(Frequency f);

/// Dataset manifest: {name, frequency, period, horizon}. Period and horizon
/// fall back to the frequency defaults and the competition horizons when
/// omitted.
struct DatasetManifest {
  std::string name;
  Frequency frequency = Frequency::Monthly;
  std::size_t period = 12;
  std::size_t horizon = 18;

  static DatasetManifest from_json(std::string_view text);
  static DatasetManifest load(const std::filesystem::path& path);
  std::string to_json() const;
};

// Competition horizon for (dataset, frequency), e.g. M3 monthly -> 18,
// M1 yearly -> 2. nullopt for unknown datasets.
std::optional<std::size_t> competition_horizon(std::string_view dataset, Frequency f);

// Long-format CSV with header columns unique_id, ds, y (any order). Series
// come back sorted by id, values ordered by ds (numeric when every ds is an
// integer, lexicographic otherwise, which orders ISO dates). Errors name the
// offending 1-based line.
std::vector<TimeSeries> parse_long_csv(std::istream& in, std::size_t period = 1);
std::vector<TimeSeries> load_long_csv(const std::filesystem::path& path, std::size_t period = 1);
void write_long_csv(std::ostream& out, std::span<const TimeSeries> series);

struct SeriesSplit {
  std::string id;
  std::size_t period = 1;
  std::vector<double> train;
  std::vector<double> val;
  std::vector<double> test;

  // train + val, the history available when forecasting the test window.
  std::vector<double> history() const;
  std::vector<double> reassemble() const;
};

struct SplitDataset {
  std::vector<SeriesSplit> series;
  std::size_t horizon = 0;
  std::vector<std::string> skipped;  // ids dropped as too short

  // Copy with every test view cleared, for tuning.
  SplitDataset tuning_view() const;
  bool has_test() const noexcept;
};

// test = last H, val = the H before it, train = the rest. Series shorter
// than 2H + 1 are skipped and listed in `skipped`.
SplitDataset split(std::span<const TimeSeries> series, std::size_t horizon);

// Number of (input, target) windows of widths L and H in a series of length n.
std::size_t window_count(std::size_t n, std::size_t lookback, std::size_t horizon);

struct WindowBatch {
  num::Tensor inputs;   // batch x L
  num::Tensor targets;  // batch x H
  std::vector<std::string> series_ids;
  std::vector<std::size_t> starts;  // input start index within the train view
};

/// Seeded sampler of training windows drawn from train views only.
///
/// Each batch first picks up to `series_per_batch` eligible series
/// (0 = all), then draws `windows_per_batch` windows uniformly over every
/// valid (series, start) pair among them. Series whose train view is
/// shorter than L + H are not eligible.
class WindowSampler {
 public:
  WindowSampler(const SplitDataset& data, std::size_t lookback, std::size_t horizon,
                std::size_t windows_per_batch, std::size_t series_per_batch, std::uint64_t seed);

  WindowBatch next();
  const std::vector<std::size_t>& eligible() const noexcept { return eligible_; }

 private:
  const SplitDataset* data_;
  std::size_t lookback_;
  std::size_t horizon_;
  std::size_t windows_per_batch_;
  std::size_t series_per_batch_;
  std::uint64_t rng_;
  std::vector<std::size_t> eligible_;
};

// All windows of a dataset in enumeration order (series-major).
WindowBatch make_all_windows(const SplitDataset& data, std::size_t lookback, std::size_t horizon);

// y_{T+h} = y_{T+h-m}, repeating the last full season.
std::vector<double> seasonal_naive(std::span<const double> train, std::size_t horizon,
                                   std::size_t period);

}  // namespace nbmoe::data
