#include "tsmeta/theta.hpp"

#include "smoothing.hpp"
#include "tsmeta/error.hpp"
#include "tsmeta/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tsmeta {

double SeasonalAdjustment::index_at(std::size_t t) const {
    if (!applied) {
        return multiplicative ? 1.0 : 0.0;
    }
    return indices[t % indices.size()];
}

bool seasonality_detected(std::span<const double> y, int period) {
    if (period < 2 || y.size() < 2 * static_cast<std::size_t>(period)) {
        return false;
    }
    const auto r = detail::autocorrelations(y, period);
    if (r.empty()) {
        return false;
    }
    double acc = 1.0;
    for (int k = 1; k < period; ++k) {
        acc += 2.0 * r[static_cast<std::size_t>(k - 1)] * r[static_cast<std::size_t>(k - 1)];
    }
    const double band = 1.645 * std::sqrt(acc / static_cast<double>(y.size()));
    return std::abs(r.back()) > band;
}

SeasonalAdjustment seasonal_adjustment(std::span<const double> y, int period) {
    SeasonalAdjustment adj;
    adj.period = period;
    if (!seasonality_detected(y, period)) {
        return adj;
    }
    adj.applied = true;
    adj.multiplicative = std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; });
    adj.indices = detail::classical_indices(y, period, adj.multiplicative);
    return adj;
}

namespace {

struct ThetaRun {
    std::vector<double> predictions;  // NaN where not scored
    double final_level = 0.0;
    double intercept = 0.0;
    double slope = 0.0;
};

constexpr std::size_t dynamic_warmup = 3;

ThetaRun run_theta(std::span<const double> y, double theta, double alpha, double z0, bool dynamic) {
    const std::size_t n = y.size();
    const double q = 1.0 - alpha;
    const double line_weight = 1.0 - 1.0 / theta;
    ThetaRun run;
    run.predictions.assign(n, std::numeric_limits<double>::quiet_NaN());

    if (!dynamic) {
        const auto line = detail::fit_line(y);
        double lev = z0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i + 1);
            const double trend = line.intercept + line.slope * t;
            run.predictions[i] = line_weight * trend + lev / theta;
            const double z = theta * y[i] + (1.0 - theta) * trend;
            lev = alpha * z + q * lev;
        }
        run.final_level = lev;
        run.intercept = line.intercept;
        run.slope = line.slope;
        return run;
    }

    // Expanding-window OLS; the theta-line level is carried in closed form:
    //   lev_t = theta*l_t + (1-theta)*(A_t*P_t + B_t*R_t) + q^t*z0
    // with l_t the SES of y from zero, P_t = 1 - q^t, R_t = alpha*t + q*R_{t-1}.
    double s1 = 0.0, s2 = 0.0, sy = 0.0, sty = 0.0;
    double ses = 0.0, r_acc = 0.0, q_pow = 1.0;
    auto coefficients = [&](double count) {
        const double denom = count * s2 - s1 * s1;
        const double b = denom != 0.0 ? (count * sty - s1 * sy) / denom : 0.0;
        return std::pair{(sy - b * s1) / count, b};
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i + 1);
        if (i >= dynamic_warmup) {
            const auto [a, b] = coefficients(static_cast<double>(i));
            const double lev = theta * ses + (1.0 - theta) * (a * (1.0 - q_pow) + b * r_acc) + q_pow * z0;
            run.predictions[i] = line_weight * (a + b * t) + lev / theta;
        }
        s1 += t;
        s2 += t * t;
        sy += y[i];
        sty += t * y[i];
        ses = alpha * y[i] + q * ses;
        r_acc = alpha * t + q * r_acc;
        q_pow *= q;
    }
    const auto [a, b] = coefficients(static_cast<double>(n));
    run.final_level = theta * ses + (1.0 - theta) * (a * (1.0 - q_pow) + b * r_acc) + q_pow * z0;
    run.intercept = a;
    run.slope = b;
    return run;
}

/// Optimal initial level for (theta, alpha): predictions are affine in z0
/// with weight q^(t-1)/theta.
double profile_initial_level(std::span<const double> y, double theta, double alpha, bool dynamic) {
    const auto base = run_theta(y, theta, alpha, 0.0, dynamic);
    const double q = 1.0 - alpha;
    double num = 0.0, den = 0.0, w = 1.0 / theta;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (std::isfinite(base.predictions[i])) {
            num += (y[i] - base.predictions[i]) * w;
            den += w * w;
        }
        w *= q;
    }
    return den > 1e-300 ? num / den : 0.0;
}

double scored_sse(std::span<const double> y, const std::vector<double>& predictions) {
    double sse = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (std::isfinite(predictions[i])) {
            sse += (y[i] - predictions[i]) * (y[i] - predictions[i]);
        }
    }
    return sse;
}

} // namespace

std::vector<double> theta_one_step(std::span<const double> adjusted, double theta, double alpha,
                                   double initial_level, bool dynamic) {
    return run_theta(adjusted, theta, alpha, initial_level, dynamic).predictions;
}

ThetaModel fit_theta_model(const TimeSeries& ts, const ThetaOptions& options) {
    if (ts.size() < 3) {
        throw InsufficientLengthError(ts.size(), 3);
    }
    if (options.theta && *options.theta < 1.0) {
        throw ConfigError("theta coefficient must be at least 1");
    }
    ThetaModel model;
    model.season = seasonal_adjustment(ts.values, ts.seasonal_period);
    model.adjusted = ts.values;
    if (model.season.applied) {
        for (std::size_t t = 0; t < model.adjusted.size(); ++t) {
            const double idx = model.season.index_at(t);
            model.adjusted[t] = model.season.multiplicative ? model.adjusted[t] / idx : model.adjusted[t] - idx;
        }
    }
    const std::span<const double> y(model.adjusted);
    model.dynamic = options.dynamic;
    if (model.dynamic && y.size() <= dynamic_warmup) {
        model.dynamic = false;
        model.note = "series too short for dynamic trend; static line used";
    }
    const bool dynamic = model.dynamic;

    // search space: alpha in [1e-4, 0.9999], and 1/theta in [1e-3, 1] when free
    const bool theta_free = !options.theta.has_value();
    Box box{{1e-4}, {0.9999}};
    std::vector<double> start{0.5};
    if (theta_free) {
        box.lower.push_back(1e-3);
        box.upper.push_back(1.0);
        start.push_back(0.5);
    }
    auto unpack = [&](const std::vector<double>& x) {
        return std::pair{theta_free ? 1.0 / x[1] : *options.theta, x[0]};
    };
    const Objective objective = [&](const std::vector<double>& x) {
        const auto [theta, alpha] = unpack(x);
        const double z0 = profile_initial_level(y, theta, alpha, dynamic);
        return scored_sse(y, run_theta(y, theta, alpha, z0, dynamic).predictions);
    };
    NelderMeadOptions nm;
    nm.max_evaluations = theta_free ? 800 : 300;
    const auto best = minimize_with_restarts(objective, start, box, options.restarts, options.seed, nm);
    if (!std::isfinite(best.value)) {
        throw FitError("theta optimization failed for series '" + ts.id + "'");
    }
    std::tie(model.theta, model.alpha) = unpack(best.x);
    model.initial_level = profile_initial_level(y, model.theta, model.alpha, dynamic);
    const auto run = run_theta(y, model.theta, model.alpha, model.initial_level, dynamic);
    model.sse = scored_sse(y, run.predictions);
    model.first_scored = dynamic ? dynamic_warmup + 1 : 1;
    model.level = run.final_level;
    model.intercept = run.intercept;
    model.slope = run.slope;
    return model;
}

std::vector<double> theta_model_forecast(const ThetaModel& model, int h) {
    if (h < 1) {
        throw ConfigError("forecast horizon must be positive");
    }
    const std::size_t n = model.adjusted.size();
    const double line_weight = 1.0 - 1.0 / model.theta;
    std::vector<double> out(static_cast<std::size_t>(h));
    for (int k = 1; k <= h; ++k) {
        const double t = static_cast<double>(n) + k;
        double v = line_weight * (model.intercept + model.slope * t) + model.level / model.theta;
        if (model.season.applied) {
            const double idx = model.season.index_at(n + static_cast<std::size_t>(k) - 1);
            v = model.season.multiplicative ? v * idx : v + idx;
        }
        out[static_cast<std::size_t>(k - 1)] = v;
    }
    return out;
}

namespace {

Forecast package(MethodId method, const ThetaModel& model, int h, std::string model_name) {
    Forecast out;
    out.method = method;
    out.values = theta_model_forecast(model, h);
    FitInfo info;
    info.model = std::move(model_name);
    info.params["alpha"] = model.alpha;
    info.params["theta"] = model.theta;
    info.params["initial_level"] = model.initial_level;
    info.params["sse"] = model.sse;
    info.params["seasonal"] = model.season.applied ? 1.0 : 0.0;
    info.note = model.note;
    out.fit_info = std::move(info);
    return out;
}

} // namespace

Forecast forecast_theta(const TimeSeries& ts, int h, const ThetaOptions& options) {
    ThetaOptions standard = options;
    standard.theta = 2.0;
    standard.dynamic = false;
    return package(MethodId::theta, fit_theta_model(ts, standard), h, "theta");
}

Forecast forecast_dotm(const TimeSeries& ts, int h, const ThetaOptions& options) {
    ThetaOptions dynamic = options;
    if (!options.theta) {
        dynamic.dynamic = true;
    }
    try {
        return package(MethodId::dotm, fit_theta_model(ts, dynamic), h, "dotm");
    } catch (const FitError& e) {
        Forecast fallback = forecast_theta(ts, h, options);
        fallback.method = MethodId::dotm;
        fallback.fit_info->note = std::string("fell back to standard theta: ") + e.what();
        return fallback;
    }
}

} // namespace tsmeta
