// Acceptance harness: one PASS/FAIL line per criterion. Criterion 5 is
// reported but does not affect the exit code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "nbmoe/analysis.hpp"
#include "nbmoe/evaluation.hpp"
#include "nbmoe/training.hpp"
#include "test_support.hpp"

using namespace nbmoe;
using basis::StackType;
using model::Model;
using model::ModelConfig;
using model::Variant;
using num::Tensor;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool gated = true;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::size_t parameter_count(const num::ParameterSet& p) {
  std::size_t n = 0;
  for (const auto& t : p.values()) n += t.size();
  return n;
}

std::size_t pick(std::uint64_t& rng, std::size_t n) { return num::splitmix64(rng) % n; }

void copy_matching(const num::ParameterSet& from, num::ParameterSet& to) {
  for (std::size_t i = 0; i < to.size(); ++i)
    if (from.contains(to.name(i)) && from.at(to.name(i)).same_shape(to.at(i))) to.at(i) = from.at(to.name(i));
}

constexpr Variant kVariants[] = {Variant::NBeats, Variant::NBeatsMoe, Variant::MoeBlock, Variant::MoeShared,
                                 Variant::MoeScaled};

// ---- 1: gradients ----------------------------------------------------------

ModelConfig toy_config(Variant v, std::uint64_t& rng) {
  const std::vector<std::vector<StackType>> stack_sets{
      {StackType::Identity}, {StackType::Trend}, {StackType::Seasonality},
      {StackType::Trend, StackType::Seasonality}, {StackType::Identity, StackType::Trend, StackType::Seasonality}};
  ModelConfig c;
  c.stack_types = stack_sets[pick(rng, stack_sets.size())];
  c.horizon = 1 + pick(rng, 2);
  c.lookback_multiplier = 1 + pick(rng, 2);
  c.mlp_units = std::vector<std::size_t>(1 + pick(rng, 2), 2 + pick(rng, 2));
  c.blocks_per_stack = 1 + pick(rng, 2);
  c.shared_weights = pick(rng, 2) == 0;
  c.trend_degree = 1 + pick(rng, 2);
  const std::size_t experts = 2 + pick(rng, 2);
  model::apply_variant(c, v, experts, 1 + pick(rng, experts));
  return c;
}

Outcome gradient_suite() {
  const auto start = Clock::now();
  std::uint64_t rng = 2024;
  double worst = 0.0;
  std::size_t models = 0, coordinates = 0, max_params = 0;
  std::string worst_name;
  for (std::size_t i = 0; i < 25; ++i) {
    const Variant v = kVariants[i % 5];
    ModelConfig cfg;
    std::size_t n_params = 0;
    for (;;) {
      cfg = toy_config(v, rng);
      n_params = parameter_count(Model(cfg, 0).parameters());
      if (n_params <= 64) break;
    }
    Model m(cfg, i);
    testing::randomize(m.parameters(), rng, 0.9);
    const std::size_t batch = 3;
    const auto x = testing::random_tensor(batch, cfg.lookback(), rng, -2, 2);
    const auto target = testing::random_tensor(batch, cfg.horizon, rng, -2, 2);
    const auto r = testing::check_gradients(m.parameters(), [&](const num::BoundParameters& b) {
      auto& tape = b.tape();
      auto diff = num::sub(m.forward(b, tape.constant(x)).forecast, tape.constant(target));
      return num::mean(num::mul(diff, diff));
    });
    if (r.max_error > worst) {
      worst = r.max_error;
      worst_name = std::string(model::to_string(v)) + ":" + r.worst;
    }
    coordinates += r.coordinates;
    max_params = std::max(max_params, n_params);
    ++models;
  }
  const double elapsed = seconds_since(start);
  return {worst < 1e-4 && elapsed < 60.0 && models >= 20,
          std::to_string(models) + " models, " + std::to_string(coordinates) + " coordinates, <= " +
              std::to_string(max_params) + " params, max rel err " + fmt("%.2e", worst) + " (" + worst_name +
              "), " + fmt("%.1fs", elapsed)};
}

// ---- 2: gated reconstruction ----------------------------------------------

Outcome gated_reconstruction() {
  std::uint64_t rng = 77;
  double worst_sum = 0.0, worst_row = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    ModelConfig c;
    c.horizon = 1 + pick(rng, 8);
    c.lookback_multiplier = 1 + pick(rng, 3);
    c.blocks_per_stack = 1 + pick(rng, 3);
    c.mlp_units = {4 + pick(rng, 5)};
    c.shared_weights = pick(rng, 2) == 0;
    const Variant v = kVariants[2 + pick(rng, 3)];
    model::apply_variant(c, pick(rng, 2) ? v : Variant::NBeats, 3, 1 + pick(rng, 3));
    c.output_gating = true;
    Model m(c, static_cast<std::uint64_t>(trial));
    m.parameters().at("gate.weight") = testing::random_tensor(c.lookback(), c.total_blocks(), rng, -3, 3);
    m.parameters().at("gate.bias") = testing::random_tensor(1, c.total_blocks(), rng, -3, 3);
    const std::size_t batch = 1 + pick(rng, 4);
    const auto out = m.predict(testing::random_tensor(batch, c.lookback(), rng, -10, 10));
    Tensor sum(batch, c.horizon);
    for (std::size_t l = 0; l < out.block_forecasts.size(); ++l)
      sum = num::add(sum, num::mul(out.block_forecasts[l], num::column(out.gate->weights, l)));
    worst_sum = std::max(worst_sum, num::max_abs_diff(sum, out.forecast));
    for (std::size_t r = 0; r < batch; ++r) {
      double total = 0.0;
      for (std::size_t l = 0; l < c.total_blocks(); ++l) total += out.gate->weights(r, l);
      worst_row = std::max(worst_row, std::abs(total - 1.0));
    }
  }
  return {worst_sum < 1e-9 && worst_row < 1e-9,
          "1000 passes, max |forecast - sum| " + fmt("%.2e", worst_sum) + ", max |row sum - 1| " +
              fmt("%.2e", worst_row)};
}

// ---- 3: basis --------------------------------------------------------------

Outcome basis_exactness() {
  double worst = 0.0;
  std::size_t matrices = 0;
  for (std::size_t h : {2, 8, 18}) {
    for (std::size_t length : {h, 2 * h, 5 * h}) {
      for (std::size_t d : {1, 2, 3}) {
        const auto b = basis::build_basis(basis::BasisKind::trend(d), length, h);
        for (std::size_t i = 0; i < length; ++i)
          for (std::size_t k = 0; k <= d; ++k) {
            const double t = static_cast<double>(i) / static_cast<double>(length);
            worst = std::max(worst, std::abs(b.matrix(i, k) - std::pow(t, static_cast<double>(k))));
          }
        ++matrices;
      }
      const auto s = basis::build_basis(basis::BasisKind::seasonality(), length, h);
      const std::size_t harmonics = h / 2 + 1;
      if (s.matrix.cols() != 1 + 2 * harmonics) return {false, "seasonality width mismatch"};
      for (std::size_t i = 0; i < length; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(length);
        worst = std::max(worst, std::abs(s.matrix(i, 0) - 1.0));
        for (std::size_t k = 1; k <= harmonics; ++k) {
          worst = std::max(worst, std::abs(s.matrix(i, k) - std::cos(kTwoPi * static_cast<double>(k) * t)));
          worst = std::max(worst, std::abs(s.matrix(i, harmonics + k) - std::sin(kTwoPi * static_cast<double>(k) * t)));
        }
      }
      ++matrices;
    }
  }
  return {worst < 1e-12, std::to_string(matrices) + " matrices, max deviation " + fmt("%.2e", worst)};
}

// ---- synthetic experiments -------------------------------------------------

enum class Shape { Both, TrendOnly, SeasonalOnly };

std::vector<data::TimeSeries> synthetic_dataset(std::size_t n_series, std::size_t length, std::uint64_t seed,
                                                bool heterogeneous) {
  std::uint64_t rng = seed;
  testing::Gaussian g{seed ^ 0xabcdefULL};
  std::vector<data::TimeSeries> out;
  for (std::size_t i = 0; i < n_series; ++i) {
    const Shape shape = heterogeneous ? static_cast<Shape>(i % 3) : Shape::Both;
    const double level = 50.0 + 100.0 * num::uniform01(rng);
    const double slope = 0.2 + 0.8 * num::uniform01(rng);
    const double amplitude = 5.0 + 10.0 * num::uniform01(rng);
    const double phase = kTwoPi * num::uniform01(rng);
    const double noise = 0.05 * amplitude;
    data::TimeSeries s{testing::series_id(i), std::vector<double>(length), 12, std::nullopt};
    for (std::size_t t = 0; t < length; ++t) {
      const double tt = static_cast<double>(t);
      double y = level + noise * g.next();
      if (shape != Shape::SeasonalOnly) y += slope * tt;
      if (shape != Shape::TrendOnly) y += amplitude * std::sin(kTwoPi * tt / 12.0 + phase);
      s.values[t] = y;
    }
    out.push_back(std::move(s));
  }
  return out;
}

ModelConfig experiment_model(Variant v) {
  ModelConfig c;
  c.horizon = 12;
  c.lookback_multiplier = 2;
  c.mlp_units = {64, 64};
  c.trend_degree = 2;
  model::apply_variant(c, v);
  return c;
}

train::TrainConfig experiment_training(std::uint64_t seed) {
  train::TrainConfig t;
  t.max_steps = 1500;
  t.learning_rate = 1e-3;
  t.batch_size = 32;
  t.windows_batch_size = 256;
  t.patience = 10;
  t.eval_interval = 50;
  t.seed = seed;
  return t;
}

struct SeedRun {
  double smape = 0.0;
  std::optional<analysis::SpecializationTable> specialization;
};

SeedRun train_and_score(Variant v, const data::SplitDataset& d, std::uint64_t seed,
                        const std::vector<data::TimeSeries>* analyze = nullptr) {
  Model m(experiment_model(v), seed);
  train::train(m, d, experiment_training(seed));
  eval::ModelForecaster f(m, std::string(model::to_string(v)));
  SeedRun out{eval::evaluate_model(f, d, "synthetic", "monthly").smape_percent, std::nullopt};
  if (analyze) out.specialization = analysis::measure_specialization(m, *analyze, 12, "synthetic");
  return out;
}

// ---- 4: synthetic end to end ----------------------------------------------

Outcome synthetic_end_to_end() {
  const auto start = Clock::now();
  const auto d = data::split(synthetic_dataset(50, 120, 4, false), 12);
  eval::SeasonalNaiveForecaster naive(12);
  const double naive_smape = eval::evaluate_model(naive, d, "synthetic", "monthly").smape_percent;
  std::size_t below = 0, beats = 0;
  std::ostringstream scores;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const double s = train_and_score(Variant::NBeatsMoe, d, seed).smape;
    below += s < 5.0;
    beats += s < naive_smape;
    scores << (seed ? " " : "") << fmt("%.2f", s);
  }
  const double elapsed = seconds_since(start);
  return {below == 10 && beats >= 9 && elapsed < 600.0,
          "smape [" + scores.str() + "], naive " + fmt("%.2f", naive_smape) + ", <5%: " + std::to_string(below) +
              "/10, beats naive: " + std::to_string(beats) + "/10, " + fmt("%.1fs", elapsed)};
}

// ---- 5 and 8 (trained part): heterogeneous set ------------------------------

struct HeterogeneousRuns {
  std::vector<double> moe;
  std::vector<double> plain;
  std::vector<analysis::SpecializationTable> tables;
};

const HeterogeneousRuns& heterogeneous_runs() {
  static const HeterogeneousRuns runs = [] {
    HeterogeneousRuns r;
    const auto series = synthetic_dataset(60, 120, 5, true);
    const auto d = data::split(series, 12);
    // Specialization is measured on the train + validation histories.
    std::vector<data::TimeSeries> histories;
    for (const auto& s : d.series) histories.push_back({s.id, s.history(), 12, std::nullopt});
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto moe = train_and_score(Variant::NBeatsMoe, d, seed, &histories);
      r.moe.push_back(moe.smape);
      r.tables.push_back(*moe.specialization);
      r.plain.push_back(train_and_score(Variant::NBeats, d, seed).smape);
    }
    return r;
  }();
  return runs;
}

Outcome heterogeneity() {
  const auto start = Clock::now();
  const auto& r = heterogeneous_runs();
  const double moe = eval::median(r.moe), plain = eval::median(r.plain);
  return {moe <= plain,
          "median nbeats-moe " + fmt("%.3f", moe) + " vs nbeats " + fmt("%.3f", plain) + " over 10 seeds, " +
              fmt("%.1fs", seconds_since(start)),
          false};
}

// ---- 6: smape --------------------------------------------------------------

Outcome smape_oracle() {
  std::uint64_t rng = 606;
  double worst = 0.0, worst_scale = 0.0;
  bool symmetric = true;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t h = 1 + pick(rng, 30);
    std::vector<double> a(h), f(h);
    for (std::size_t i = 0; i < h; ++i) {
      a[i] = 1000.0 * (num::uniform01(rng) - 0.3);
      f[i] = 1000.0 * (num::uniform01(rng) - 0.3);
      if (pick(rng, 20) == 0) a[i] = f[i] = 0.0;
    }
    double loop = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
      const double den = std::fabs(a[i]) + std::fabs(f[i]);
      loop += den == 0.0 ? 0.0 : std::fabs(a[i] - f[i]) / den;
    }
    loop *= 200.0 / static_cast<double>(h);
    const double s = eval::smape(a, f);
    worst = std::max(worst, std::abs(s - loop));
    symmetric = symmetric && eval::smape(f, a) == s;
    const double c = std::exp(10.0 * (num::uniform01(rng) - 0.5));
    for (auto& v : a) v *= c;
    for (auto& v : f) v *= c;
    worst_scale = std::max(worst_scale, std::abs(eval::smape(a, f) - s));
  }
  return {worst < 1e-12 && symmetric && worst_scale < 1e-9,
          "1000 pairs, max oracle diff " + fmt("%.2e", worst) + ", symmetric " + (symmetric ? "yes" : "no") +
              ", max scale diff " + fmt("%.2e", worst_scale)};
}

// ---- 7: stl ----------------------------------------------------------------

Outcome stl_suite() {
  std::uint64_t rng = 707;
  double identity = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + pick(rng, 24);
    const std::size_t n = (m == 1 ? 3 : 2 * m + 1) + pick(rng, 150);
    std::vector<double> y(n);
    for (auto& v : y) v = 1e3 * (num::uniform01(rng) - 0.5) * (1 + pick(rng, 100));
    analysis::StlConfig cfg;
    cfg.outer_loops = pick(rng, 3);
    cfg.center_cycles = pick(rng, 2) == 0;
    const auto c = analysis::stl_decompose(y, m, cfg);
    for (std::size_t i = 0; i < n; ++i)
      identity = std::max(identity, std::abs(c.trend[i] + c.seasonal[i] + c.residual[i] - y[i]));
  }

  const std::size_t m = 12, n = 144;
  const double amplitude = 4.0;
  std::vector<double> y(n), season(n), trend(n);
  for (std::size_t t = 0; t < n; ++t) {
    season[t] = amplitude * std::sin(kTwoPi * static_cast<double>(t) / m + 0.7);
    trend[t] = 20.0 + 0.25 * static_cast<double>(t);
    y[t] = season[t] + trend[t];
  }
  const auto c = analysis::stl_decompose(y, m);
  double s_err = 0.0, t_err = 0.0;
  for (std::size_t t = m; t + m < n; ++t) {
    s_err = std::max(s_err, std::abs(c.seasonal[t] - season[t]));
    t_err = std::max(t_err, std::abs(c.trend[t] - trend[t]));
  }
  const double t_tol = 0.02 * (trend.back() - trend.front());

  double constant = 0.0;
  const std::vector<double> flat(60, -3.5);
  for (std::size_t period : {1, 4, 12}) {
    const auto k = analysis::stl_decompose(flat, period);
    for (std::size_t t = 0; t < flat.size(); ++t)
      constant = std::max({constant, std::abs(k.seasonal[t]), std::abs(k.residual[t])});
  }
  return {identity < 1e-6 && s_err < 0.05 * amplitude && t_err < t_tol && constant < 1e-6,
          "identity " + fmt("%.1e", identity) + ", sine err " + fmt("%.3f", s_err) + " (tol " +
              fmt("%.2f", 0.05 * amplitude) + "), ramp err " + fmt("%.3f", t_err) + " (tol " + fmt("%.2f", t_tol) +
              "), constant " + fmt("%.1e", constant)};
}

// ---- 8: specialization -----------------------------------------------------

std::vector<double> unit_template(std::size_t length, const std::function<double(double)>& f) {
  std::vector<double> v(length);
  double mean = 0.0;
  for (std::size_t t = 0; t < length; ++t) mean += v[t] = f(static_cast<double>(t));
  mean /= static_cast<double>(length);
  double norm = 0.0;
  for (auto& x : v) norm += (x -= mean) * x;
  for (auto& x : v) x /= std::sqrt(norm);
  return v;
}

// Gate that scores the layer-normalized window against a ramp (trend stack)
// and eight phase-shifted sinusoids (seasonal stack); anything that matches
// neither falls through to the identity stack's bias.
Model frozen_router(std::size_t horizon) {
  ModelConfig c;
  c.horizon = horizon;
  c.lookback_multiplier = 4;
  c.mlp_units = {4};
  c.blocks_per_stack = 8;
  c.output_gating = true;
  Model m(c, 1);
  const std::size_t l = c.lookback(), per = c.blocks_per_stack;
  const double scale = 20.0, threshold = 4.5, off = -1e3;
  Tensor w(l, c.total_blocks()), b(1, c.total_blocks(), off);
  auto set_column = [&](std::size_t block, const std::vector<double>& u) {
    for (std::size_t t = 0; t < l; ++t) w(t, block) = scale * u[t];
    b(0, block) = 0.0;
  };
  b(0, 0) = scale * threshold;
  const auto ramp = unit_template(l, [](double t) { return t; });
  std::vector<double> neg(ramp);
  for (auto& x : neg) x = -x;
  set_column(per, ramp);
  set_column(per + 1, neg);
  for (std::size_t j = 0; j < 8; ++j) {
    const double shift = kTwoPi * static_cast<double>(j) / 8.0;
    set_column(2 * per + j, unit_template(l, [&](double t) { return std::sin(kTwoPi * t / 12.0 + shift); }));
  }
  m.parameters().at("gate.weight") = w;
  m.parameters().at("gate.bias") = b;
  return m;
}

Outcome specialization() {
  const auto series = synthetic_dataset(50, 120, 8, false);
  const auto table = analysis::measure_specialization(frozen_router(12), series, 12, "synthetic");
  const std::vector<std::vector<double>> expected{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}};
  bool exact = table.n_series == series.size();
  double row_err = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    exact = exact && table.ratios[k] == expected[k];
    double total = 0.0;
    for (double r : table.ratios[k]) total += r;
    row_err = std::max(row_err, std::abs(total - 1.0));
  }

  const auto& runs = heterogeneous_runs();
  double seasonal_on_seasonal = 0.0, residual_on_seasonal = 0.0;
  for (const auto& t : runs.tables) {
    seasonal_on_seasonal += t.row(analysis::Component::Seasonal)[2] / static_cast<double>(runs.tables.size());
    residual_on_seasonal += t.row(analysis::Component::Residual)[2] / static_cast<double>(runs.tables.size());
    for (const auto& row : t.ratios) {
      double total = 0.0;
      for (double r : row) total += r;
      row_err = std::max(row_err, std::abs(total - 1.0));
    }
  }
  std::ostringstream rows;
  for (std::size_t k = 0; k < 3; ++k) {
    rows << (k ? "; " : "");
    for (std::size_t s = 0; s < 3; ++s) rows << (s ? " " : "") << fmt("%.2f", table.ratios[k][s]);
  }
  return {exact && row_err < 1e-9 && seasonal_on_seasonal > residual_on_seasonal,
          "frozen table [" + rows.str() + "] " + (exact ? "exact" : "NOT exact") + ", row sum err " +
              fmt("%.1e", row_err) + "; trained seasonal->seasonal " + fmt("%.3f", seasonal_on_seasonal) +
              " vs residual->seasonal " + fmt("%.3f", residual_on_seasonal)};
}

// ---- 9: variant reductions -------------------------------------------------

ModelConfig reduction_config(model::BlockVariant v, std::uint64_t& rng) {
  ModelConfig c;
  c.horizon = 2 + pick(rng, 6);
  c.lookback_multiplier = 1 + pick(rng, 3);
  c.blocks_per_stack = 1 + pick(rng, 2);
  c.mlp_units = std::vector<std::size_t>(1 + pick(rng, 2), 4 + pick(rng, 6));
  c.shared_weights = pick(rng, 2) == 0;
  c.block_variant = std::move(v);
  return c;
}

Outcome variant_reductions() {
  std::uint64_t rng = 909;
  double shared_err = 0.0, single_err = 0.0, gate_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + pick(rng, 3), k = 1 + pick(rng, n);
    auto cfg = reduction_config(model::BlockVariant::moe_shared(n, k), rng);
    Model shared(cfg, trial);
    for (std::size_t i = 0; i < shared.parameters().size(); ++i)
      if (shared.parameters().name(i).find(".shared.") != std::string::npos) shared.parameters().at(i).fill(0.0);
    cfg.block_variant = model::BlockVariant::moe_block(n, k);
    Model block(cfg, trial + 1000);
    copy_matching(shared.parameters(), block.parameters());
    auto x = testing::random_tensor(4, cfg.lookback(), rng, -5, 5);
    shared_err = std::max(shared_err, num::max_abs_diff(shared.predict(x).forecast, block.predict(x).forecast));

    cfg = reduction_config(model::BlockVariant::moe_block(1, 1), rng);
    Model one(cfg, trial);
    cfg.block_variant = model::BlockVariant::plain();
    Model plain(cfg, trial + 1000);
    auto& pp = plain.parameters();
    for (std::size_t i = 0; i < pp.size(); ++i) {
      std::string name = pp.name(i);
      const auto fc = name.find(".fc");
      if (fc != std::string::npos) name.insert(fc, ".expert0");
      pp.at(i) = one.parameters().at(name);
    }
    x = testing::random_tensor(4, cfg.lookback(), rng, -5, 5);
    single_err = std::max(single_err, num::max_abs_diff(one.predict(x).forecast, plain.predict(x).forecast));

    cfg = reduction_config(model::BlockVariant::plain(), rng);
    cfg.output_gating = true;
    Model gated(cfg, trial);
    cfg.output_gating = false;
    Model ungated(cfg, trial + 1000);
    copy_matching(gated.parameters(), ungated.parameters());
    x = testing::random_tensor(4, cfg.lookback(), rng, -5, 5);
    const auto scaled = num::scale(gated.predict(x).forecast, static_cast<double>(cfg.total_blocks()));
    gate_err = std::max(gate_err, num::max_abs_diff(scaled, ungated.predict(x).forecast));
  }
  return {shared_err < 1e-12 && single_err < 1e-12 && gate_err < 1e-9,
          "zeroed shared vs moe-block " + fmt("%.1e", shared_err) + ", one expert vs plain " +
              fmt("%.1e", single_err) + ", uniform gate x B vs ungated " + fmt("%.1e", gate_err)};
}

// ---- 10: determinism -------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "nbmoe_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream csv(root / "data.csv");
    data::write_long_csv(csv, synthetic_dataset(12, 96, 10, true));
    std::ofstream(root / "manifest.json") << R"({"name": "synthetic", "frequency": "monthly", "horizon": 12})";
  }
  const std::vector<std::string> data_args{"--data", (root / "data.csv").string(), "--manifest",
                                           (root / "manifest.json").string()};
  std::ostringstream sink;
  auto pipeline = [&](const std::string& tag) {
    const auto run_dir = root / ("run_" + tag), eval_dir = root / ("eval_" + tag);
    std::vector<std::string> train{"train", "--variant", "moe-shared", "--seeds", "3", "--max-steps", "150",
                                   "--mlp-units", "16", "--out", run_dir.string()};
    train.insert(train.end(), data_args.begin(), data_args.end());
    std::vector<std::string> evaluate{"evaluate", "--checkpoint-dir", run_dir.string(), "--model", "seasonal-naive",
                                      "--out", eval_dir.string()};
    evaluate.insert(evaluate.end(), data_args.begin(), data_args.end());
    const int a = cli::run(train, sink, sink), b = cli::run(evaluate, sink, sink);
    return std::tuple{a == 0 && b == 0, slurp(run_dir / "seed_3" / "train_report.json"),
                      slurp(eval_dir / "results.csv")};
  };
  const auto [ok1, report1, csv1] = pipeline("a");
  const auto [ok2, report2, csv2] = pipeline("b");
  fs::remove_all(root);
  const bool same = ok1 && ok2 && !report1.empty() && report1 == report2 && !csv1.empty() && csv1 == csv2;
  return {same, std::string("train_report.json ") + (report1 == report2 ? "identical" : "differs") +
                    ", results.csv " + (csv1 == csv2 ? "identical" : "differs") +
                    (ok1 && ok2 ? "" : ", pipeline error: " + sink.str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient suite", gradient_suite},
      {"gated reconstruction", gated_reconstruction},
      {"basis exactness", basis_exactness},
      {"synthetic end to end", synthetic_end_to_end},
      {"heterogeneity check", heterogeneity},
      {"smape oracle", smape_oracle},
      {"stl suite", stl_suite},
      {"specialization harness", specialization},
      {"variant reductions", variant_reductions},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << i + 1 << " (" << criteria[i].first << "): " << (o.pass ? "PASS" : "FAIL")
              << (o.gated ? "" : " [reported, not gated]") << " - " << o.detail << std::endl;
    if (!o.pass && o.gated) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
