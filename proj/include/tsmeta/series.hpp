#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace tsmeta {

/// Missing observations are stored as quiet NaN until imputation.
inline constexpr double missing_value = std::numeric_limits<double>::quiet_NaN();

/// Univariate series with its seasonal-period metadata.
struct TimeSeries {
    std::string id;
    std::vector<double> values;
    int seasonal_period = 7;
    /// Optional second seasonality; 0 means absent.
    int seasonal_period2 = 0;
    long start_index = 0;

    std::size_t size() const noexcept { return values.size(); }
    bool has_missing() const;
};

using Collection = std::vector<TimeSeries>;

/// One rolling-origin train/test split. `origin_index` is the number of
/// training observations, i.e. the 1-based position of the last one.
struct OriginSplit {
    TimeSeries train;
    std::vector<double> test;
    std::size_t origin_index = 0;
};

struct CollectionSplit {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::uint64_t seed = 0;
};

enum class CsvFormat { long_csv, wide_csv };

CsvFormat parse_csv_format(const std::string& name);
std::string to_string(CsvFormat format);

/// Loads a collection. long-csv: header `series_id,t,value`, series sorted by
/// id and observations by t. wide-csv: one column per series in header order.
/// Empty cells, `NA` and non-finite numbers become missing.
Collection load_collection(const std::filesystem::path& path, CsvFormat format,
                           int seasonal_period = 7);

/// Replaces missing values with the mean of the observed ones.
TimeSeries impute_missing(const TimeSeries& ts);

/// Minimum length accepted by rolling_origins for the given configuration.
std::size_t rolling_origin_min_length(int horizon, int n_origins, int step, int seasonal_period);

/// Latest origin first; origin k ends its training slice at len - h - k*step.
std::vector<OriginSplit> rolling_origins(const TimeSeries& ts, int horizon, int n_origins,
                                         int step);

/// Uniform random partition with |test| = round(test_ratio * N). Both sides
/// keep the input order of the ids.
CollectionSplit split_collection(std::span<const std::string> ids, double test_ratio,
                                 std::uint64_t seed);

} // namespace tsmeta
