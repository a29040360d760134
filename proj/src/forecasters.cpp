#include "tsmeta/forecasters.hpp"

#include "tsmeta/error.hpp"
#include "tsmeta/ets.hpp"
#include "tsmeta/temporal.hpp"
#include "tsmeta/theta.hpp"

#include <cmath>
#include <numeric>

namespace tsmeta {

namespace {

constexpr std::array<std::string_view, 12> method_names{
    "naive", "snaive", "sma", "ets_ann", "ets_ana", "ets_aan",
    "ets_aaa", "ets_auto", "theta", "dotm", "mapa", "thief",
};

void check_horizon(int h) {
    if (h < 1) {
        throw ConfigError("forecast horizon must be positive");
    }
}

void check_nonempty(const TimeSeries& ts) {
    if (ts.values.empty()) {
        throw InsufficientLengthError(0, 1);
    }
}

} // namespace

std::string_view to_string(MethodId id) { return method_names.at(static_cast<std::size_t>(id)); }

MethodId parse_method(std::string_view name) {
    for (std::size_t i = 0; i < method_names.size(); ++i) {
        if (method_names[i] == name) {
            return all_methods[i];
        }
    }
    throw ConfigError("unknown forecasting method '" + std::string(name) + "'");
}

Forecast forecast_naive(const TimeSeries& ts, int h) {
    check_horizon(h);
    check_nonempty(ts);
    return {MethodId::naive, std::vector<double>(static_cast<std::size_t>(h), ts.values.back()), {}};
}

Forecast forecast_snaive(const TimeSeries& ts, int h) {
    check_horizon(h);
    const auto s = static_cast<std::size_t>(std::max(ts.seasonal_period, 1));
    if (ts.size() < s) {
        throw InsufficientLengthError(ts.size(), s);
    }
    Forecast out{MethodId::snaive, std::vector<double>(static_cast<std::size_t>(h)), {}};
    const std::size_t cycle_start = ts.size() - s;
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        out.values[k] = ts.values[cycle_start + k % s];
    }
    return out;
}

Forecast forecast_sma(const TimeSeries& ts, int h) {
    check_horizon(h);
    check_nonempty(ts);
    const double mean =
        std::accumulate(ts.values.begin(), ts.values.end(), 0.0) / static_cast<double>(ts.size());
    return {MethodId::sma, std::vector<double>(static_cast<std::size_t>(h), mean), {}};
}

Forecast run_forecaster(MethodId method, const TimeSeries& ts, int h, const ForecasterConfig& config) {
    check_horizon(h);
    if (ts.has_missing()) {
        throw DataError("series '" + ts.id + "' contains missing values; impute first");
    }
    EtsFitOptions ets;
    ets.restarts = config.restarts;
    ets.seed = config.seed;
    ThetaOptions theta;
    theta.restarts = config.restarts;
    theta.seed = config.seed;

    Forecast out;
    switch (method) {
    case MethodId::naive: out = forecast_naive(ts, h); break;
    case MethodId::snaive: out = forecast_snaive(ts, h); break;
    case MethodId::sma: out = forecast_sma(ts, h); break;
    case MethodId::ets_ann: out = forecast_ets(fit_ets(ts, ets_ann, ets), ts, h); break;
    case MethodId::ets_ana: out = forecast_ets(fit_ets(ts, ets_ana, ets), ts, h); break;
    case MethodId::ets_aan: out = forecast_ets(fit_ets(ts, ets_aan, ets), ts, h); break;
    case MethodId::ets_aaa: out = forecast_ets(fit_ets(ts, ets_aaa, ets), ts, h); break;
    case MethodId::ets_auto: out = select_ets_auto(ts, h, ets); break;
    case MethodId::theta: out = forecast_theta(ts, h, theta); break;
    case MethodId::dotm: out = forecast_dotm(ts, h, theta); break;
    case MethodId::mapa: out = forecast_mapa(ts, h, config.mapa_max_level, config); break;
    case MethodId::thief: out = forecast_thief(ts, h, config); break;
    }
    out.method = method;
    if (out.values.size() != static_cast<std::size_t>(h)) {
        throw FitError(std::string(to_string(method)) + " returned the wrong number of forecasts");
    }
    for (double v : out.values) {
        if (!std::isfinite(v)) {
            throw FitError(std::string(to_string(method)) + " produced a non-finite forecast for series '" +
                           ts.id + "'");
        }
    }
    return out;
}

} // namespace tsmeta
