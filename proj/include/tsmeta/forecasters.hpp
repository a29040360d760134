#pragma once

#include "tsmeta/series.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tsmeta {

/// Registered forecasting methods. Declaration order is the registry order
/// used for every tie-break.
enum class MethodId {
    naive,
    snaive,
    sma,
    ets_ann,
    ets_ana,
    ets_aan,
    ets_aaa,
    ets_auto,
    theta,
    dotm,
    mapa,
    thief,
};

inline constexpr std::array<MethodId, 12> all_methods{
    MethodId::naive,   MethodId::snaive,  MethodId::sma,      MethodId::ets_ann,
    MethodId::ets_ana, MethodId::ets_aan, MethodId::ets_aaa,  MethodId::ets_auto,
    MethodId::theta,   MethodId::dotm,    MethodId::mapa,     MethodId::thief,
};

std::string_view to_string(MethodId id);
MethodId parse_method(std::string_view name);
inline int registry_rank(MethodId id) { return static_cast<int>(id); }

struct FitInfo {
    std::string model;
    std::map<std::string, double> params;
    std::optional<double> aic;
    std::string note;
};

struct Forecast {
    MethodId method = MethodId::naive;
    std::vector<double> values;
    std::optional<FitInfo> fit_info;
};

/// Knobs shared by the fitted methods.
struct ForecasterConfig {
    int mapa_max_level = 7;
    int restarts = 4;
    std::uint64_t seed = 20190601;
};

Forecast forecast_naive(const TimeSeries& ts, int h);
Forecast forecast_snaive(const TimeSeries& ts, int h);
Forecast forecast_sma(const TimeSeries& ts, int h);

/// Dispatches to the method's implementation. Throws on precondition
/// violations or when the result contains non-finite values.
Forecast run_forecaster(MethodId method, const TimeSeries& ts, int h,
                        const ForecasterConfig& config = {});

} // namespace tsmeta
