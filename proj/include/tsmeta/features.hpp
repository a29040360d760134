#pragma once

#include "tsmeta/series.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsmeta {

inline constexpr std::size_t feature_count = 24;

inline constexpr std::array<std::string_view, feature_count> feature_names{
    "frequency",   "nperiods",    "seasonal_period1",   "seasonal_period2",   "trend",       "spike",
    "linearity",   "curvature",   "e_acf1",             "e_acf10",            "seasonal_strength1",
    "seasonal_strength2", "peak1", "peak2",             "trough1",            "trough2",     "entropy",
    "x_acf1",      "x_acf10",     "diff1_acf1",         "diff1_acf10",        "diff2_acf1",  "diff2_acf10",
    "seas_acf1",
};

/// Column index of a feature name; throws ConfigError for unknown names.
std::size_t feature_index(std::string_view name);

struct FeatureVector {
    std::array<double, feature_count> values{};

    double operator[](std::string_view name) const { return values[feature_index(name)]; }
    double& operator[](std::string_view name) { return values[feature_index(name)]; }
};

/// Additive decomposition: series = trend + seasonal + seasonal2 + remainder.
/// seasonal2 is all zeros unless a second period is present.
struct Decomposition {
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> seasonal2;
    std::vector<double> remainder;
};

/// Mean-centred sample autocorrelation with denominator n. Lag 0 is 1.
/// Throws DataError for zero variance or lag >= length.
double acf(std::span<const double> y, int lag);

/// Classical moving-average decomposition. Seasonal periods below 2 give a
/// 5-term moving-average trend and no seasonal part.
Decomposition decompose(const TimeSeries& ts);

FeatureVector extract_features(const TimeSeries& ts);

struct FeatureMatrix {
    std::vector<std::string> series_ids;
    std::vector<FeatureVector> rows;
    std::vector<bool> failed;  // extraction failed; the row holds NaN
    std::array<bool, feature_count> constant{};  // zero variance across usable rows

    std::vector<std::size_t> active_columns() const;
    std::vector<std::string> constant_names() const;
};

/// A series whose extraction throws is flagged in `failed` with a warning;
/// the remaining rows are unaffected.
FeatureMatrix feature_matrix(const Collection& collection, unsigned threads = 0);

/// Flags columns whose values are identical over the given rows. Rows with a
/// non-finite value are ignored; with no usable row every column is constant.
std::array<bool, feature_count> constant_columns(std::span<const FeatureVector> rows);

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& matrix);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

} // namespace tsmeta
