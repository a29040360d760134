#pragma once

#include "tsmeta/forecasters.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tsmeta {

/// Seasonal adjustment applied before theta fitting.
struct SeasonalAdjustment {
    bool applied = false;
    bool multiplicative = true;
    int period = 1;
    std::vector<double> indices;  // per phase; phase 0 is the first observation

    /// Index for the 0-based position t (in-sample or beyond).
    double index_at(std::size_t t) const;
};

/// True when |r_m| exceeds the 90% band 1.645*sqrt((1 + 2*sum_{k<m} r_k^2)/n).
bool seasonality_detected(std::span<const double> y, int period);

/// Multiplicative classical decomposition when every value is positive,
/// additive otherwise. No adjustment when the test does not fire.
SeasonalAdjustment seasonal_adjustment(std::span<const double> y, int period);

struct ThetaOptions {
    std::optional<double> theta;  // fixed theta coefficient (>= 1)
    bool dynamic = false;         // re-estimate the trend line on an expanding window
    int restarts = 4;
    std::uint64_t seed = 20190601;
};

/// Two-line theta model on the seasonally adjusted series:
///   forecast(h) = (1 - 1/theta) * (A + B*(n+h)) + (1/theta) * ses_level
/// where ses_level smooths the theta line theta*y + (1-theta)*(A + B*t).
/// With theta = 2 and a static line this is the classical theta method.
struct ThetaModel {
    double theta = 2.0;
    double alpha = 0.5;
    double initial_level = 0.0;  // SES level of the theta line before t = 1
    double intercept = 0.0;      // final trend line A_n + B_n * t
    double slope = 0.0;
    double level = 0.0;          // final SES level of the theta line
    double sse = 0.0;            // in-sample one-step SSE on the adjusted scale
    std::size_t first_scored = 1;  // first 1-based time index included in sse
    bool dynamic = false;
    std::vector<double> adjusted;
    SeasonalAdjustment season;
    std::string note;
};

ThetaModel fit_theta_model(const TimeSeries& ts, const ThetaOptions& options);

/// One-step in-sample predictions of the adjusted series for given
/// parameters; entry t-1 predicts y_t, NaN where the model is not scored.
std::vector<double> theta_one_step(std::span<const double> adjusted, double theta, double alpha,
                                   double initial_level, bool dynamic);

std::vector<double> theta_model_forecast(const ThetaModel& model, int h);

Forecast forecast_theta(const TimeSeries& ts, int h, const ThetaOptions& options = {});

/// Dynamic optimised theta: theta >= 1 and alpha chosen jointly, trend line
/// re-estimated at each in-sample step. Falls back to forecast_theta when
/// the optimization fails.
Forecast forecast_dotm(const TimeSeries& ts, int h, const ThetaOptions& options = {});

} // namespace tsmeta
