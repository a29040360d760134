#include "smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tsmeta::detail {

double mean(std::span<const double> y) {
    if (y.empty()) {
        return 0.0;
    }
    return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

double variance(std::span<const double> y) {
    if (y.size() < 2) {
        return 0.0;
    }
    const double m = mean(y);
    double ss = 0.0;
    for (double v : y) {
        ss += (v - m) * (v - m);
    }
    return ss / static_cast<double>(y.size() - 1);
}

std::vector<double> autocorrelations(std::span<const double> y, int max_lag) {
    const double m = mean(y);
    double denom = 0.0;
    for (double v : y) {
        denom += (v - m) * (v - m);
    }
    if (!(denom > 0.0)) {
        return {};
    }
    std::vector<double> r(static_cast<std::size_t>(std::max(max_lag, 0)), 0.0);
    for (std::size_t k = 1; k <= r.size() && k < y.size(); ++k) {
        double num = 0.0;
        for (std::size_t t = 0; t + k < y.size(); ++t) {
            num += (y[t] - m) * (y[t + k] - m);
        }
        r[k - 1] = num / denom;
    }
    return r;
}

Line fit_line(std::span<const double> y) {
    const auto n = static_cast<double>(y.size());
    const double t_mean = (n + 1.0) / 2.0;
    const double y_mean = mean(y);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double dt = static_cast<double>(i + 1) - t_mean;
        sxy += dt * (y[i] - y_mean);
        sxx += dt * dt;
    }
    Line line;
    line.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    line.intercept = y_mean - line.slope * t_mean;
    return line;
}

std::vector<double> centered_moving_average(std::span<const double> y, int window) {
    const auto n = y.size();
    std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
    if (window <= 1) {
        out.assign(y.begin(), y.end());
        return out;
    }
    const auto w = static_cast<std::size_t>(window);
    if (window % 2 == 1) {
        const std::size_t half = w / 2;
        if (n < w) {
            return out;
        }
        for (std::size_t t = half; t + half < n; ++t) {
            double sum = 0.0;
            for (std::size_t j = t - half; j <= t + half; ++j) {
                sum += y[j];
            }
            out[t] = sum / static_cast<double>(w);
        }
    } else {
        // 2 x w: weights 1/(2w) at both ends, 1/w inside
        const std::size_t half = w / 2;
        if (n < w + 1) {
            return out;
        }
        for (std::size_t t = half; t + half < n; ++t) {
            double sum = 0.5 * (y[t - half] + y[t + half]);
            for (std::size_t j = t - half + 1; j < t + half; ++j) {
                sum += y[j];
            }
            out[t] = sum / static_cast<double>(w);
        }
    }
    return out;
}

void extend_edges_linearly(std::vector<double>& trend, int span) {
    const auto n = trend.size();
    std::size_t first = 0;
    while (first < n && !std::isfinite(trend[first])) {
        ++first;
    }
    if (first == n) {
        return;
    }
    std::size_t last = n - 1;
    while (!std::isfinite(trend[last])) {
        --last;
    }
    const std::size_t valid = last - first + 1;
    const auto use = std::min<std::size_t>(valid, static_cast<std::size_t>(std::max(span, 1)));

    // fit on positions relative to the window start, t = 1..use
    const Line head = fit_line(std::span<const double>(trend.data() + first, use));
    for (std::size_t t = 0; t < first; ++t) {
        const double rel = static_cast<double>(t) - static_cast<double>(first) + 1.0;
        trend[t] = head.intercept + head.slope * rel;
    }
    const std::size_t tail_start = last + 1 - use;
    const Line tail = fit_line(std::span<const double>(trend.data() + tail_start, use));
    for (std::size_t t = last + 1; t < n; ++t) {
        const double rel = static_cast<double>(t - tail_start) + 1.0;
        trend[t] = tail.intercept + tail.slope * rel;
    }
}

std::vector<double> classical_indices(std::span<const double> y, int period, bool multiplicative) {
    const auto m = static_cast<std::size_t>(period);
    const auto trend = centered_moving_average(y, period);
    std::vector<double> sums(m, 0.0);
    std::vector<std::size_t> counts(m, 0);
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (!std::isfinite(trend[t])) {
            continue;
        }
        const double detrended = multiplicative ? y[t] / trend[t] : y[t] - trend[t];
        sums[t % m] += detrended;
        ++counts[t % m];
    }
    std::vector<double> idx(m, multiplicative ? 1.0 : 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        if (counts[j] > 0) {
            idx[j] = sums[j] / static_cast<double>(counts[j]);
        }
    }
    const double centre = mean(idx);
    for (double& v : idx) {
        v = multiplicative ? v / centre : v - centre;
    }
    return idx;
}

} // namespace tsmeta::detail
