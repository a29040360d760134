#pragma once

#include "tsmeta/forecasters.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tsmeta {

// Additive-error exponential smoothing without damping. Recursions:
//   level    l_t = a(y_t - s_{t-m}) + (1-a)(l_{t-1} + b_{t-1})
//   trend    b_t = b(l_t - l_{t-1}) + (1-b) b_{t-1}
//   seasonal s_t = g(y_t - l_t) + (1-g) s_{t-m}
// with absent components held at zero.

enum class Component { none, additive };

struct EtsForm {
    Component trend = Component::none;
    Component seasonal = Component::none;

    bool has_trend() const { return trend == Component::additive; }
    bool has_season() const { return seasonal == Component::additive; }
    /// "ANN", "AAN", "ANA" or "AAA".
    std::string name() const;
};

inline constexpr EtsForm ets_ann{Component::none, Component::none};
inline constexpr EtsForm ets_aan{Component::additive, Component::none};
inline constexpr EtsForm ets_ana{Component::none, Component::additive};
inline constexpr EtsForm ets_aaa{Component::additive, Component::additive};

struct EtsParams {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

/// Seasonal states are stored oldest first: seasonal[j] belongs to the
/// (j+1)-th most distant period of the last cycle.
struct EtsState {
    double level = 0.0;
    double trend = 0.0;
    std::vector<double> seasonal;
};

struct EtsFitOptions {
    std::optional<double> alpha;  // fixed value instead of optimizing
    std::optional<double> beta;
    std::optional<double> gamma;
    int restarts = 4;
    std::uint64_t seed = 20190601;
};

struct EtsModel {
    EtsForm form;
    int period = 1;
    EtsParams params;
    EtsState initial;
    EtsState final_state;
    double sse = 0.0;
    double aic = 0.0;
    int free_parameters = 0;
    std::size_t observations = 0;
};

struct EtsFilterResult {
    std::vector<double> fitted;  // one-step-ahead in-sample forecasts
    std::vector<double> errors;
    EtsState final_state;
};

EtsFilterResult ets_filter(std::span<const double> y, EtsForm form, int period,
                           const EtsParams& params, const EtsState& initial);

/// h-step forecast function l + k*b + s_{(k-1) mod m}.
std::vector<double> ets_forecast_function(const EtsState& state, int h);

/// Gaussian-likelihood AIC n*ln(SSE/n) + 2k. SSE/n is floored at a tiny
/// fraction of the data's mean square so exact fits compare by k alone.
double ets_aic(double sse, std::size_t n, int k, double mean_square);

/// Least-squares fit of smoothing parameters and initial states. The initial
/// states enter the one-step errors linearly, so for each candidate parameter
/// vector they are solved exactly; the parameters themselves are searched
/// with bounded Nelder-Mead plus seeded restarts.
EtsModel fit_ets(const TimeSeries& ts, EtsForm form, const EtsFitOptions& options = {});

/// Re-runs the filter over `ts` from the model's initial state and forecasts.
Forecast forecast_ets(const EtsModel& model, const TimeSeries& ts, int h);

struct EtsSelection {
    EtsModel winner;
    std::vector<EtsModel> candidates;  // in ANN, AAN, ANA, AAA order, skipping infeasible
};

/// Fits ANN, AAN, ANA, AAA (seasonal ones only when period >= 2 and the
/// series spans two cycles) and keeps the lowest AIC, earliest on ties.
EtsSelection select_ets_model(const TimeSeries& ts, const EtsFitOptions& options = {});

Forecast select_ets_auto(const TimeSeries& ts, int h, const EtsFitOptions& options = {});

} // namespace tsmeta
