#pragma once

#include <span>
#include <vector>

namespace tsmeta::detail {

/// Centered moving average of the given window (2xwindow MA for even
/// windows). Positions without a full window are NaN.
std::vector<double> centered_moving_average(std::span<const double> y, int window);

/// Fills leading/trailing NaNs of a smoothed series by extending an OLS line
/// through the nearest `span` valid values on each side.
void extend_edges_linearly(std::vector<double>& trend, int span);

/// Per-phase seasonal indices from a classical decomposition. Phase 0 is the
/// first observation. Additive indices sum to zero; multiplicative indices
/// average one. Requires y.size() >= 2*period.
std::vector<double> classical_indices(std::span<const double> y, int period, bool multiplicative);

/// Ordinary least squares of y on t = 1..n; returns {intercept, slope}.
struct Line {
    double intercept = 0.0;
    double slope = 0.0;
};
Line fit_line(std::span<const double> y);

/// Biased (denominator n), mean-centered autocorrelations r_1..r_max_lag.
/// Empty when the series has zero variance.
std::vector<double> autocorrelations(std::span<const double> y, int max_lag);

double mean(std::span<const double> y);
/// Sample variance with n-1 denominator; 0 for fewer than two values.
double variance(std::span<const double> y);

} // namespace tsmeta::detail
