#pragma once

#include "tsmeta/forecasters.hpp"
#include "tsmeta/series.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsmeta {

enum class Measure { smape, mase };

inline constexpr std::array<Measure, 2> all_measures{Measure::smape, Measure::mase};

std::string_view to_string(Measure m);
Measure parse_measure(std::string_view name);

/// Mean absolute percentage error in percent. Throws on a zero actual.
double mape(std::span<const double> actual, std::span<const double> forecast);

/// Symmetric MAPE on the percent scale (0..200). Throws when some
/// actual + forecast is zero.
double smape(std::span<const double> actual, std::span<const double> forecast);

/// MAE of the forecast divided by the in-sample MAE of the lag-s naive
/// forecast. Throws when that scale is zero.
double seasonal_mase(std::span<const double> actual, std::span<const double> forecast,
                     std::span<const double> insample, int s);

/// Mean error of one method on one series over the rolling origins.
/// sMAPE is stored on the fractional scale (percent / 100).
struct EvaluationRecord {
    std::string series_id;
    MethodId method = MethodId::naive;
    Measure measure = Measure::smape;
    double value = 0.0;  // NaN when failed
    bool failed = false;
};

struct OriginConfig {
    int horizon = 56;
    int origins = 3;
    int step = 0;  // 0 means step = horizon
    int effective_step() const { return step > 0 ? step : horizon; }
};

/// One cached point forecast.
struct ForecastRow {
    std::string series_id;
    MethodId method = MethodId::naive;
    std::size_t origin = 0;  // training length
    int step = 1;
    double value = 0.0;
};

/// Records come out ordered by series (input order), then method (registry
/// order), then measure. Forecasting failures are flagged, not thrown.
std::vector<EvaluationRecord> evaluate_pool(const Collection& collection, std::span<const MethodId> methods,
                                            const OriginConfig& origins, const ForecasterConfig& config = {},
                                            std::vector<ForecastRow>* forecasts = nullptr,
                                            unsigned threads = 0);

struct RankingRow {
    MethodId method = MethodId::naive;
    double mean_error = 0.0;
};

struct RankingTable {
    Measure measure = Measure::smape;
    std::vector<RankingRow> rows;  // ascending, registry order on ties
};

/// Mean error across series, skipping failed records. Methods with no valid
/// record rank last with a NaN mean.
RankingTable rank_methods(std::span<const EvaluationRecord> records, Measure measure);

/// Best (lowest-error) pool member on one series; failed members are
/// skipped. Throws when a pool member has no record or all failed.
MethodId best_label(std::span<const EvaluationRecord> records, const std::string& series_id,
                    std::span<const MethodId> pool, Measure measure);

void write_records_csv(const std::filesystem::path& path, std::span<const EvaluationRecord> records);
std::vector<EvaluationRecord> read_records_csv(const std::filesystem::path& path);
void write_ranking_csv(const std::filesystem::path& path, const RankingTable& table);
void write_forecasts_csv(const std::filesystem::path& path, std::span<const ForecastRow> rows);

} // namespace tsmeta
