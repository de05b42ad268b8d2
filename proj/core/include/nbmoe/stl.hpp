#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nbmoe::analysis {

/// Seasonal-trend decomposition by loess (additive, inner loop only by
/// default). Spans are forced odd; zero means "derive from the period".
struct StlConfig {
  std::size_t seasonal_span = 7;
  std::size_t trend_span = 0;     // next odd >= 1.5 m / (1 - 1.5 / seasonal_span)
  std::size_t low_pass_span = 0;  // next odd >= m
  int seasonal_degree = 1;
  int trend_degree = 1;
  int low_pass_degree = 1;
  std::size_t inner_loops = 2;
  std::size_t outer_loops = 0;
  // Removes the mean of each full cycle from the seasonal component and
  // moves it into the trend.
  bool center_cycles = true;
};

struct StlComponents {
  std::vector<double> trend;
  std::vector<double> seasonal;
  std::vector<double> residual;
  std::size_t period = 1;
};

// Requires n >= 2m + 1 for m >= 2. For m = 1 the seasonal component is zero
// and the trend is a single loess pass. Throws DataError on short or
// non-finite input.
StlComponents stl_decompose(std::span<const double> series, std::size_t period,
                            const StlConfig& config = {});

// Local (degree 0 or 1) tricube-weighted regression evaluated at every
// index 0..n-1 with a window of `span` neighbours.
std::vector<double> loess_smooth(std::span<const double> y, std::size_t span, int degree,
                                 std::span<const double> robustness_weights = {});

}  // namespace nbmoe::analysis
