#include "tsmeta/features.hpp"

#include "csv.hpp"
#include "smoothing.hpp"
#include "tsmeta/error.hpp"
#include "tsmeta/parallel.hpp"

#include <fftw3.h>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>

namespace tsmeta {

namespace {

// FFTW's planner is not re-entrant.
std::mutex fftw_planner_mutex;

struct SeasonalPart {
    std::vector<double> trend;
    std::vector<double> seasonal;
};

SeasonalPart classical_seasonal(std::span<const double> y, int period) {
    const auto m = static_cast<std::size_t>(period);
    SeasonalPart part;
    part.trend = detail::centered_moving_average(y, period);
    std::vector<double> sums(m, 0.0);
    std::vector<std::size_t> counts(m, 0);
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (std::isfinite(part.trend[t])) {
            sums[t % m] += y[t] - part.trend[t];
            ++counts[t % m];
        }
    }
    std::vector<double> idx(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        idx[j] = counts[j] > 0 ? sums[j] / static_cast<double>(counts[j]) : 0.0;
    }
    const double centre = detail::mean(idx);
    for (double& v : idx) {
        v -= centre;
    }
    detail::extend_edges_linearly(part.trend, period);
    part.seasonal.resize(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) {
        part.seasonal[t] = idx[t % m];
    }
    return part;
}

double safe_acf(std::span<const double> y, int lag) {
    if (lag < 0 || static_cast<std::size_t>(lag) >= y.size()) {
        return 0.0;
    }
    const auto r = detail::autocorrelations(y, lag);
    if (r.empty()) {
        return 0.0;
    }
    return lag == 0 ? 1.0 : r.back();
}

double acf_sum_squares(std::span<const double> y, int lags) {
    const int usable = std::min<int>(lags, static_cast<int>(y.size()) - 1);
    if (usable < 1) {
        return 0.0;
    }
    const auto r = detail::autocorrelations(y, usable);
    double sum = 0.0;
    for (double v : r) {
        sum += v * v;
    }
    return sum;
}

std::vector<double> difference(std::span<const double> y) {
    std::vector<double> d;
    for (std::size_t t = 1; t < y.size(); ++t) {
        d.push_back(y[t] - y[t - 1]);
    }
    return d;
}

double strength(std::span<const double> component, std::span<const double> remainder) {
    std::vector<double> combined(component.size());
    for (std::size_t t = 0; t < combined.size(); ++t) {
        combined[t] = component[t] + remainder[t];
    }
    const double total = detail::variance(combined);
    if (!(total > 0.0)) {
        return 0.0;
    }
    return std::clamp(1.0 - detail::variance(remainder) / total, 0.0, 1.0);
}

/// Variance of the leave-one-out variances of the remainder.
double spike(std::span<const double> r) {
    const std::size_t n = r.size();
    if (n < 3) {
        return 0.0;
    }
    const double mean = detail::mean(r);
    const double v = detail::variance(r);
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = r[i] - mean;
        loo[i] = (v * static_cast<double>(n - 1) - d * d) / static_cast<double>(n - 2);
    }
    return detail::variance(loo);
}

/// Coefficients of the trend on orthonormal degree-1 and degree-2 polynomials.
std::pair<double, double> poly_coefficients(std::span<const double> trend) {
    const std::size_t n = trend.size();
    std::vector<double> p1(n), p2(n);
    const double tbar = (static_cast<double>(n) + 1.0) / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
        p1[i] = static_cast<double>(i + 1) - tbar;
        p2[i] = p1[i] * p1[i];
    }
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += a[i] * b[i];
        }
        return s;
    };
    auto normalize = [&](std::vector<double>& a) {
        const double norm = std::sqrt(dot(a, a));
        for (double& v : a) {
            v = norm > 0.0 ? v / norm : 0.0;
        }
    };
    normalize(p1);
    const double p2_mean = detail::mean(p2);
    for (double& v : p2) {
        v -= p2_mean;
    }
    const double proj = dot(p2, p1);
    for (std::size_t i = 0; i < n; ++i) {
        p2[i] -= proj * p1[i];
    }
    normalize(p2);
    const std::vector<double> t(trend.begin(), trend.end());
    return {dot(t, p1), dot(t, p2)};
}

/// Shannon entropy of the normalized periodogram divided by ln(#frequencies).
double spectral_entropy(std::span<const double> y) {
    const std::size_t n = y.size();
    const std::size_t k = n / 2;
    if (k < 2) {
        return 0.0;
    }
    const double mean = detail::mean(y);
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) {
        x[t] = y[t] - mean;
    }
    // split cosine bell over 10% at each end
    const auto m = static_cast<std::size_t>(std::floor(static_cast<double>(n) * 0.1));
    for (std::size_t i = 0; i < m; ++i) {
        const double w =
            0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(2 * i + 1) / static_cast<double>(2 * m)));
        x[i] *= w;
        x[n - 1 - i] *= w;
    }
    auto* spectrum = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex);
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), x.data(), spectrum, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::vector<double> power(k);
    double total = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
        power[j - 1] = spectrum[j][0] * spectrum[j][0] + spectrum[j][1] * spectrum[j][1];
        total += power[j - 1];
    }
    {
        std::lock_guard lock(fftw_planner_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(spectrum);
    if (!(total > 0.0)) {
        return 0.0;
    }
    double h = 0.0;
    for (double p : power) {
        const double q = p / total;
        if (q > 0.0) {
            h -= q * std::log(q);
        }
    }
    return std::clamp(h / std::log(static_cast<double>(k)), 0.0, 1.0);
}

std::pair<double, double> peak_trough(std::span<const double> seasonal, int period) {
    if (period < 2 || seasonal.size() < static_cast<std::size_t>(period)) {
        return {0.0, 0.0};
    }
    const auto first = seasonal.begin();
    const auto last = first + period;
    return {static_cast<double>(std::max_element(first, last) - first + 1),
            static_cast<double>(std::min_element(first, last) - first + 1)};
}

std::string format_value(double v) { return std::isfinite(v) ? fmt::format("{}", v) : "NA"; }

} // namespace

std::size_t feature_index(std::string_view name) {
    const auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end()) {
        throw ConfigError("unknown feature '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - feature_names.begin());
}

double acf(std::span<const double> y, int lag) {
    if (lag < 0 || static_cast<std::size_t>(lag) >= y.size()) {
        throw DataError("ACF lag must be in [0, length)");
    }
    if (!(detail::variance(y) > 0.0)) {
        throw DataError("ACF undefined for a series with zero variance");
    }
    return lag == 0 ? 1.0 : detail::autocorrelations(y, lag).back();
}

Decomposition decompose(const TimeSeries& ts) {
    const std::span<const double> y(ts.values);
    const std::size_t n = y.size();
    const int s = ts.seasonal_period;
    Decomposition d;
    d.seasonal.assign(n, 0.0);
    d.seasonal2.assign(n, 0.0);
    if (s >= 2) {
        if (n < 2 * static_cast<std::size_t>(s)) {
            throw InsufficientLengthError(n, 2 * static_cast<std::size_t>(s));
        }
        auto part = classical_seasonal(y, s);
        d.trend = std::move(part.trend);
        d.seasonal = std::move(part.seasonal);
        const int s2 = ts.seasonal_period2;
        if (s2 >= 2 && s2 != s && n >= 2 * static_cast<std::size_t>(s2)) {
            std::vector<double> adjusted(n);
            for (std::size_t t = 0; t < n; ++t) {
                adjusted[t] = y[t] - d.seasonal[t];
            }
            auto second = classical_seasonal(adjusted, s2);
            d.trend = std::move(second.trend);
            d.seasonal2 = std::move(second.seasonal);
        }
    } else {
        if (n < 3) {
            throw InsufficientLengthError(n, 3);
        }
        int window = 5;
        while (static_cast<std::size_t>(window) > n) {
            window -= 2;
        }
        d.trend = detail::centered_moving_average(y, window);
        detail::extend_edges_linearly(d.trend, window);
    }
    d.remainder.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        d.remainder[t] = y[t] - d.trend[t] - d.seasonal[t] - d.seasonal2[t];
    }
    return d;
}

FeatureVector extract_features(const TimeSeries& ts) {
    if (ts.has_missing()) {
        throw DataError("series '" + ts.id + "' contains missing values; impute first");
    }
    const std::span<const double> y(ts.values);
    const int s = ts.seasonal_period;
    const bool seasonal = s >= 2;
    const bool second = seasonal && ts.seasonal_period2 >= 2 && ts.seasonal_period2 != s &&
                        ts.size() >= 2 * static_cast<std::size_t>(ts.seasonal_period2);
    const auto d = decompose(ts);
    if (!(detail::variance(y) > 0.0)) {
        spdlog::debug("series {} is constant; autocorrelation features set to 0", ts.id);
    }

    FeatureVector f;
    f["frequency"] = s;
    f["nperiods"] = (seasonal ? 1 : 0) + (second ? 1 : 0);
    f["seasonal_period1"] = s;
    f["seasonal_period2"] = second ? ts.seasonal_period2 : 0;

    f["trend"] = strength(d.trend, d.remainder);
    f["seasonal_strength1"] = seasonal ? strength(d.seasonal, d.remainder) : 0.0;
    f["seasonal_strength2"] = second ? strength(d.seasonal2, d.remainder) : 0.0;
    f["spike"] = spike(d.remainder);
    const auto [lin, curv] = poly_coefficients(d.trend);
    f["linearity"] = lin;
    f["curvature"] = curv;
    f["e_acf1"] = safe_acf(d.remainder, 1);
    f["e_acf10"] = acf_sum_squares(d.remainder, 10);
    const auto [p1, t1] = peak_trough(d.seasonal, seasonal ? s : 1);
    f["peak1"] = p1;
    f["trough1"] = t1;
    const auto [p2, t2] = peak_trough(d.seasonal2, second ? ts.seasonal_period2 : 1);
    f["peak2"] = p2;
    f["trough2"] = t2;
    f["entropy"] = spectral_entropy(y);
    f["x_acf1"] = safe_acf(y, 1);
    f["x_acf10"] = acf_sum_squares(y, 10);
    const auto d1 = difference(y);
    const auto d2 = difference(d1);
    f["diff1_acf1"] = safe_acf(d1, 1);
    f["diff1_acf10"] = acf_sum_squares(d1, 10);
    f["diff2_acf1"] = safe_acf(d2, 1);
    f["diff2_acf10"] = acf_sum_squares(d2, 10);
    f["seas_acf1"] = seasonal ? safe_acf(y, s) : 0.0;
    for (std::size_t i = 0; i < feature_count; ++i) {
        if (!std::isfinite(f.values[i])) {
            throw FitError("feature " + std::string(feature_names[i]) + " is not finite for series '" + ts.id + "'");
        }
    }
    return f;
}

std::vector<std::size_t> FeatureMatrix::active_columns() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < feature_count; ++j) {
        if (!constant[j]) {
            out.push_back(j);
        }
    }
    return out;
}

std::vector<std::string> FeatureMatrix::constant_names() const {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < feature_count; ++j) {
        if (constant[j]) {
            out.emplace_back(feature_names[j]);
        }
    }
    return out;
}

std::array<bool, feature_count> constant_columns(std::span<const FeatureVector> rows) {
    std::vector<const FeatureVector*> usable;
    for (const auto& r : rows) {
        if (std::all_of(r.values.begin(), r.values.end(), [](double v) { return std::isfinite(v); })) {
            usable.push_back(&r);
        }
    }
    std::array<bool, feature_count> flags{};
    for (std::size_t j = 0; j < feature_count; ++j) {
        flags[j] = std::all_of(usable.begin(), usable.end(),
                               [&](const FeatureVector* r) { return r->values[j] == usable.front()->values[j]; });
    }
    return flags;
}

FeatureMatrix feature_matrix(const Collection& collection, unsigned threads) {
    FeatureMatrix m;
    m.rows.resize(collection.size());
    std::vector<std::string> errors(collection.size());
    parallel_for(
        collection.size(),
        [&](std::size_t i) {
            try {
                m.rows[i] = extract_features(collection[i]);
            } catch (const Error& e) {
                m.rows[i].values.fill(std::numeric_limits<double>::quiet_NaN());
                errors[i] = e.what();
            }
        },
        threads);
    for (std::size_t i = 0; i < collection.size(); ++i) {
        m.series_ids.push_back(collection[i].id);
        m.failed.push_back(!errors[i].empty());
        if (!errors[i].empty()) {
            spdlog::warn("feature extraction failed for series {}: {}", collection[i].id, errors[i]);
        }
    }
    m.constant = constant_columns(m.rows);
    return m;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& matrix) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "series_id";
    for (auto name : feature_names) {
        out << ',' << name;
    }
    out << '\n';
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
        out << csv::quote_if_needed(matrix.series_ids[i]);
        for (double v : matrix.rows[i].values) {
            out << ',' << format_value(v);
        }
        out << '\n';
    }
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::string line;
    std::getline(in, line);
    const auto header = csv::split(line);
    if (header.size() != feature_count + 1 || header[0] != "series_id" ||
        !std::equal(feature_names.begin(), feature_names.end(), header.begin() + 1)) {
        throw ParseError(path.string(), 1, "unexpected feature header");
    }
    FeatureMatrix m;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) {
            continue;
        }
        const auto fields = csv::split(line);
        if (fields.size() != feature_count + 1) {
            throw ParseError(path.string(), line_no, "expected " + std::to_string(feature_count + 1) + " fields");
        }
        FeatureVector row;
        bool failed = false;
        for (std::size_t j = 0; j < feature_count; ++j) {
            const auto v = csv::parse_double(fields[j + 1]);
            if (!v && csv::trim(fields[j + 1]) != "NA") {
                throw ParseError(path.string(), line_no, "invalid number '" + fields[j + 1] + "'");
            }
            row.values[j] = v ? *v : std::numeric_limits<double>::quiet_NaN();
            failed = failed || !v;
        }
        m.series_ids.push_back(fields[0]);
        m.failed.push_back(failed);
        m.rows.push_back(row);
    }
    m.constant = constant_columns(m.rows);
    return m;
}

} // namespace tsmeta
