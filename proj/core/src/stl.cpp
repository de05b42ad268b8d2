#include "nbmoe/stl.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "nbmoe/errors.hpp"

namespace nbmoe::analysis {

namespace {

// Indices below follow the classical formulation: positions are 1-based
// (x = 1..n) and arrays are accessed as y[x - 1].

std::size_t odd_at_least(double v, std::size_t floor_value = 3) {
  auto n = static_cast<std::size_t>(std::ceil(v - 1e-12));
  n = std::max(n, floor_value);
  if (n % 2 == 0) ++n;
  return n;
}

// Loess estimate at position xs using points nleft..nright.
std::optional<double> loess_at(std::span<const double> y, std::size_t n, std::size_t len, int degree,
                               double xs, std::size_t nleft, std::size_t nright,
                               std::span<const double> rw, std::vector<double>& w) {
  const double range = static_cast<double>(n) - 1.0;
  double h = std::max(xs - static_cast<double>(nleft), static_cast<double>(nright) - xs);
  if (len > n) h += static_cast<double>((len - n) / 2);
  const double h9 = 0.999 * h;
  const double h1 = 0.001 * h;

  double total = 0.0;
  for (std::size_t j = nleft; j <= nright; ++j) {
    double wj = 0.0;
    const double r = std::abs(static_cast<double>(j) - xs);
    if (r <= h9) {
      if (r <= h1) {
        wj = 1.0;
      } else {
        const double q = r / h;
        const double c = 1.0 - q * q * q;
        wj = c * c * c;
      }
      if (!rw.empty()) wj *= rw[j - 1];
      total += wj;
    }
    w[j - 1] = wj;
  }
  if (total <= 0.0) return std::nullopt;

  for (std::size_t j = nleft; j <= nright; ++j) w[j - 1] /= total;
  if (h > 0.0 && degree > 0) {
    double a = 0.0;
    for (std::size_t j = nleft; j <= nright; ++j) a += w[j - 1] * static_cast<double>(j);
    double b = xs - a;
    double c = 0.0;
    for (std::size_t j = nleft; j <= nright; ++j) {
      const double d = static_cast<double>(j) - a;
      c += w[j - 1] * d * d;
    }
    if (std::sqrt(c) > 0.001 * range) {
      b /= c;
      for (std::size_t j = nleft; j <= nright; ++j)
        w[j - 1] *= b * (static_cast<double>(j) - a) + 1.0;
    }
  }
  double ys = 0.0;
  for (std::size_t j = nleft; j <= nright; ++j) ys += w[j - 1] * y[j - 1];
  return ys;
}

std::vector<double> loess_all(std::span<const double> y, std::size_t len, int degree,
                              std::span<const double> rw) {
  const std::size_t n = y.size();
  std::vector<double> ys(y.begin(), y.end());
  if (n < 2) return ys;
  std::vector<double> w(n);
  auto estimate = [&](std::size_t i, std::size_t nleft, std::size_t nright) {
    auto v = loess_at(y, n, len, degree, static_cast<double>(i), nleft, nright, rw, w);
    ys[i - 1] = v ? *v : y[i - 1];
  };
  if (len >= n) {
    for (std::size_t i = 1; i <= n; ++i) estimate(i, 1, n);
    return ys;
  }
  const std::size_t half = (len + 1) / 2;
  std::size_t nleft = 1, nright = len;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i > half && nright != n) {
      ++nleft;
      ++nright;
    }
    estimate(i, nleft, nright);
  }
  return ys;
}

std::vector<double> moving_average(std::span<const double> x, std::size_t len) {
  const std::size_t n_out = x.size() - len + 1;
  std::vector<double> out(n_out);
  for (std::size_t j = 0; j < n_out; ++j) {
    double v = 0.0;
    for (std::size_t k = 0; k < len; ++k) v += x[j + k];
    out[j] = v / static_cast<double>(len);
  }
  return out;
}

// Cycle-subseries smoothing, extended by one period at each end
// (result length n + 2 * period).
std::vector<double> smooth_cycle_subseries(std::span<const double> y, std::size_t period,
                                           std::size_t span, int degree,
                                           std::span<const double> rw) {
  const std::size_t n = y.size();
  std::vector<double> season(n + 2 * period);
  for (std::size_t j = 1; j <= period; ++j) {
    const std::size_t k = (n - j) / period + 1;
    std::vector<double> sub(k), sub_rw;
    for (std::size_t i = 1; i <= k; ++i) sub[i - 1] = y[(i - 1) * period + j - 1];
    if (!rw.empty()) {
      sub_rw.resize(k);
      for (std::size_t i = 1; i <= k; ++i) sub_rw[i - 1] = rw[(i - 1) * period + j - 1];
    }
    std::vector<double> smoothed(k + 2);
    const auto inner = loess_all(sub, span, degree, sub_rw);
    std::copy(inner.begin(), inner.end(), smoothed.begin() + 1);

    std::vector<double> w(k);
    const std::size_t nright = std::min(span, k);
    auto lo = loess_at(sub, k, span, degree, 0.0, 1, nright, sub_rw, w);
    smoothed[0] = lo ? *lo : smoothed[1];
    const std::size_t nleft = k >= span ? k - span + 1 : 1;
    auto hi = loess_at(sub, k, span, degree, static_cast<double>(k + 1), nleft, k, sub_rw, w);
    smoothed[k + 1] = hi ? *hi : smoothed[k];

    for (std::size_t m = 1; m <= k + 2; ++m) season[(m - 1) * period + j - 1] = smoothed[m - 1];
  }
  return season;
}

std::vector<double> robustness_weights(std::span<const double> y, std::span<const double> fit) {
  const std::size_t n = y.size();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = std::abs(y[i] - fit[i]);
  std::vector<double> sorted = r;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m0 = n / 2;
  const std::size_t m1 = n - 1 - n / 2;
  const double cmad = 3.0 * (sorted[m0] + sorted[m1]);
  const double c9 = 0.999 * cmad, c1 = 0.001 * cmad;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (r[i] <= c1) {
      w[i] = 1.0;
    } else if (r[i] <= c9) {
      const double u = r[i] / cmad;
      w[i] = (1.0 - u * u) * (1.0 - u * u);
    } else {
      w[i] = 0.0;
    }
  }
  return w;
}

}  // namespace

std::vector<double> loess_smooth(std::span<const double> y, std::size_t span, int degree,
                                 std::span<const double> robustness_weights) {
  if (degree < 0 || degree > 1) throw ConfigError("loess degree must be 0 or 1");
  if (span < 1) throw ConfigError("loess span must be >= 1");
  return loess_all(y, span, degree, robustness_weights);
}

StlComponents stl_decompose(std::span<const double> series, std::size_t period,
                            const StlConfig& config) {
  const std::size_t n = series.size();
  if (period == 0) throw ConfigError("STL period must be >= 1");
  for (double v : series)
    if (!std::isfinite(v)) throw DataError("STL input contains non-finite values");

  const std::size_t ns = odd_at_least(static_cast<double>(config.seasonal_span));
  const std::size_t nt = config.trend_span > 0
                             ? odd_at_least(static_cast<double>(config.trend_span))
                             : odd_at_least(1.5 * static_cast<double>(period) / (1.0 - 1.5 / static_cast<double>(ns)));
  const std::size_t nl = config.low_pass_span > 0 ? odd_at_least(static_cast<double>(config.low_pass_span))
                                                  : odd_at_least(static_cast<double>(period));

  StlComponents out;
  out.period = period;
  if (period == 1) {
    if (n < 3) throw DataError("STL needs at least 3 observations for period 1");
    out.trend = loess_all(series, nt, config.trend_degree, {});
    out.seasonal.assign(n, 0.0);
  } else {
    if (n < 2 * period + 1) {
      throw DataError("STL needs at least 2m+1 = " + std::to_string(2 * period + 1) +
                      " observations, got " + std::to_string(n));
    }
    std::vector<double> trend(n, 0.0), season(n, 0.0), rw;
    std::vector<double> work(n);
    for (std::size_t outer = 0; outer <= config.outer_loops; ++outer) {
      for (std::size_t inner = 0; inner < config.inner_loops; ++inner) {
        for (std::size_t i = 0; i < n; ++i) work[i] = series[i] - trend[i];
        const auto cycle = smooth_cycle_subseries(work, period, ns, config.seasonal_degree, rw);
        auto low = moving_average(cycle, period);
        low = moving_average(low, period);
        low = moving_average(low, 3);
        low = loess_all(low, nl, config.low_pass_degree, {});
        for (std::size_t i = 0; i < n; ++i) season[i] = cycle[period + i] - low[i];
        for (std::size_t i = 0; i < n; ++i) work[i] = series[i] - season[i];
        trend = loess_all(work, nt, config.trend_degree, rw);
      }
      if (outer == config.outer_loops) break;
      std::vector<double> fit(n);
      for (std::size_t i = 0; i < n; ++i) fit[i] = trend[i] + season[i];
      rw = robustness_weights(series, fit);
    }
    if (config.center_cycles) {
      for (std::size_t start = 0; start + period <= n; start += period) {
        double mean = 0.0;
        for (std::size_t i = start; i < start + period; ++i) mean += season[i];
        mean /= static_cast<double>(period);
        for (std::size_t i = start; i < start + period; ++i) {
          season[i] -= mean;
          trend[i] += mean;
        }
      }
    }
    out.trend = std::move(trend);
    out.seasonal = std::move(season);
  }
  out.residual.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.residual[i] = series[i] - out.trend[i] - out.seasonal[i];
  return out;
}

}  // namespace nbmoe::analysis
