#include "tsmeta/ets.hpp"

#include "tsmeta/error.hpp"
#include "tsmeta/optimize.hpp"
#include "tsmeta/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tsmeta {

std::string EtsForm::name() const {
    std::string out = "A";
    out += has_trend() ? 'A' : 'N';
    out += has_season() ? 'A' : 'N';
    return out;
}

EtsFilterResult ets_filter(std::span<const double> y, EtsForm form, int period,
                           const EtsParams& params, const EtsState& initial) {
    const bool trend = form.has_trend();
    const bool season = form.has_season();
    const auto m = static_cast<std::size_t>(season ? period : 1);

    EtsFilterResult out;
    out.fitted.resize(y.size());
    out.errors.resize(y.size());
    double level = initial.level;
    double slope = trend ? initial.trend : 0.0;
    std::vector<double> ring = season ? initial.seasonal : std::vector<double>(1, 0.0);

    for (std::size_t t = 0; t < y.size(); ++t) {
        const std::size_t slot = t % m;
        const double s_old = season ? ring[slot] : 0.0;
        const double yhat = level + slope + s_old;
        out.fitted[t] = yhat;
        out.errors[t] = y[t] - yhat;

        const double prev_level = level;
        level = params.alpha * (y[t] - s_old) + (1.0 - params.alpha) * (prev_level + slope);
        if (trend) {
            slope = params.beta * (level - prev_level) + (1.0 - params.beta) * slope;
        }
        if (season) {
            ring[slot] = params.gamma * (y[t] - level) + (1.0 - params.gamma) * s_old;
        }
    }

    out.final_state.level = level;
    out.final_state.trend = slope;
    if (season) {
        // rotate so the oldest state (next to be used) comes first
        out.final_state.seasonal.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            out.final_state.seasonal[j] = ring[(y.size() + j) % m];
        }
    }
    return out;
}

std::vector<double> ets_forecast_function(const EtsState& state, int h) {
    if (h < 1) {
        throw ConfigError("forecast horizon must be positive");
    }
    std::vector<double> out(static_cast<std::size_t>(h));
    const std::size_t m = state.seasonal.size();
    for (int k = 1; k <= h; ++k) {
        const double s = m > 0 ? state.seasonal[static_cast<std::size_t>(k - 1) % m] : 0.0;
        out[static_cast<std::size_t>(k - 1)] = state.level + k * state.trend + s;
    }
    return out;
}

double ets_aic(double sse, std::size_t n, int k, double mean_square) {
    const double floor = 1e-14 * std::max(mean_square, 1e-300);
    const double mse = std::max(sse / static_cast<double>(n), floor);
    return static_cast<double>(n) * std::log(mse) + 2.0 * k;
}

namespace {

constexpr double param_lower = 1e-4;
constexpr double param_upper = 0.9999;

struct FreeLayout {
    bool trend;
    bool season;
    int period;
    int state_count() const { return 1 + (trend ? 1 : 0) + (season ? period - 1 : 0); }

    /// Initial state for a free-state vector; the last seasonal state makes
    /// the cycle sum to zero.
    EtsState unpack(const Eigen::VectorXd& theta) const {
        EtsState s;
        int i = 0;
        s.level = theta[i++];
        s.trend = trend ? theta[i++] : 0.0;
        if (season) {
            s.seasonal.resize(static_cast<std::size_t>(period));
            double sum = 0.0;
            for (int j = 0; j < period - 1; ++j) {
                s.seasonal[static_cast<std::size_t>(j)] = theta[i++];
                sum += theta[i - 1];
            }
            s.seasonal.back() = -sum;
        }
        return s;
    }
};

/// Solves the initial states minimizing SSE for fixed smoothing parameters.
/// The one-step errors are affine in the initial state: e = c - M*theta.
EtsState solve_initial_state(std::span<const double> y, EtsForm form, int period,
                             const EtsParams& params, const FreeLayout& layout,
                             const std::vector<double>& zeros) {
    const auto n = static_cast<Eigen::Index>(y.size());
    const int p = layout.state_count();

    EtsState zero_state;
    if (layout.season) {
        zero_state.seasonal.assign(static_cast<std::size_t>(period), 0.0);
    }
    const auto base = ets_filter(y, form, period, params, zero_state);

    Eigen::MatrixXd response(n, p);
    for (int col = 0; col < p; ++col) {
        Eigen::VectorXd unit = Eigen::VectorXd::Zero(p);
        unit[col] = 1.0;
        const auto r = ets_filter(zeros, form, period, params, layout.unpack(unit));
        for (Eigen::Index t = 0; t < n; ++t) {
            response(t, col) = r.fitted[static_cast<std::size_t>(t)];
        }
    }
    const Eigen::Map<const Eigen::VectorXd> c(base.errors.data(), n);
    const Eigen::VectorXd theta = response.completeOrthogonalDecomposition().solve(c);
    return layout.unpack(theta);
}

double sum_squares(const std::vector<double>& e) {
    return std::inner_product(e.begin(), e.end(), e.begin(), 0.0);
}

EtsState heuristic_state(std::span<const double> y, const FreeLayout& layout) {
    EtsState s;
    const auto m = static_cast<std::size_t>(layout.season ? layout.period : 1);
    const std::size_t first = std::min(m, y.size());
    s.level = std::accumulate(y.begin(), y.begin() + static_cast<long>(first), 0.0) /
              static_cast<double>(first);
    if (layout.trend && y.size() >= 2 * m) {
        const double second =
            std::accumulate(y.begin() + static_cast<long>(m), y.begin() + static_cast<long>(2 * m), 0.0) /
            static_cast<double>(m);
        s.trend = (second - s.level) / static_cast<double>(m);
    } else if (layout.trend && y.size() >= 2) {
        s.trend = y[1] - y[0];
    }
    if (layout.season) {
        s.seasonal.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            s.seasonal[j] = y[j] - s.level;
        }
        const double mean = std::accumulate(s.seasonal.begin(), s.seasonal.end(), 0.0) / static_cast<double>(m);
        for (double& v : s.seasonal) {
            v -= mean;
        }
    }
    return s;
}

} // namespace

EtsModel fit_ets(const TimeSeries& ts, EtsForm form, const EtsFitOptions& options) {
    const std::span<const double> y(ts.values);
    const int period = form.has_season() ? ts.seasonal_period : 1;
    if (form.has_season()) {
        if (period < 2) {
            throw DataError("seasonal ETS needs a seasonal period of at least 2");
        }
        if (y.size() < 2 * static_cast<std::size_t>(period)) {
            throw InsufficientLengthError(y.size(), 2 * static_cast<std::size_t>(period));
        }
    }
    const FreeLayout layout{form.has_trend(), form.has_season(), period};

    // free smoothing parameters: 0 = alpha, 1 = beta, 2 = gamma
    EtsParams params{0.3, 0.05, 0.05};
    auto field = [](EtsParams& p, int which) -> double& {
        return which == 0 ? p.alpha : (which == 1 ? p.beta : p.gamma);
    };
    std::vector<std::pair<int, std::optional<double>>> slots{{0, options.alpha}};
    if (form.has_trend()) {
        slots.emplace_back(1, options.beta);
    }
    if (form.has_season()) {
        slots.emplace_back(2, options.gamma);
    }
    std::vector<int> free;
    std::vector<double> start;
    for (const auto& [which, fixed] : slots) {
        if (fixed) {
            if (*fixed < 0.0 || *fixed > 1.0) {
                throw ConfigError("fixed smoothing parameters must lie in [0, 1]");
            }
            field(params, which) = *fixed;
        } else {
            free.push_back(which);
            start.push_back(field(params, which));
        }
    }

    const int k = static_cast<int>(free.size()) + layout.state_count();
    if (y.size() <= static_cast<std::size_t>(k)) {
        throw InsufficientLengthError(y.size(), static_cast<std::size_t>(k) + 1);
    }

    const std::vector<double> zeros(y.size(), 0.0);
    auto evaluate = [&](const EtsParams& p, EtsState* state_out) {
        EtsState init = solve_initial_state(y, form, period, p, layout, zeros);
        bool finite = std::isfinite(init.level) && std::isfinite(init.trend) &&
                      std::all_of(init.seasonal.begin(), init.seasonal.end(),
                                  [](double v) { return std::isfinite(v); });
        if (!finite) {
            init = heuristic_state(y, layout);
        }
        const double sse = sum_squares(ets_filter(y, form, period, p, init).errors);
        if (state_out) {
            *state_out = std::move(init);
        }
        return sse;
    };

    if (!free.empty()) {
        const Objective objective = [&](const std::vector<double>& x) {
            EtsParams p = params;
            for (std::size_t i = 0; i < free.size(); ++i) {
                field(p, free[i]) = x[i];
            }
            return evaluate(p, nullptr);
        };
        Box box{std::vector<double>(free.size(), param_lower), std::vector<double>(free.size(), param_upper)};
        NelderMeadOptions nm;
        nm.max_evaluations = 400 * static_cast<int>(free.size());
        const auto best = minimize_with_restarts(objective, start, box, options.restarts, options.seed, nm);
        if (!std::isfinite(best.value)) {
            throw FitError("ETS(" + form.name() + ") optimization failed for series '" + ts.id + "'");
        }
        for (std::size_t i = 0; i < free.size(); ++i) {
            field(params, free[i]) = best.x[i];
        }
    }

    EtsModel model;
    model.form = form;
    model.period = period;
    model.params = params;
    model.sse = evaluate(params, &model.initial);
    if (!std::isfinite(model.sse)) {
        throw FitError("ETS(" + form.name() + ") produced a non-finite fit for series '" + ts.id + "'");
    }
    model.final_state = ets_filter(y, form, period, params, model.initial).final_state;
    model.free_parameters = k;
    model.observations = y.size();
    const double mean_square = std::inner_product(y.begin(), y.end(), y.begin(), 0.0) / static_cast<double>(y.size());
    model.aic = ets_aic(model.sse, y.size(), k, mean_square);
    return model;
}

Forecast forecast_ets(const EtsModel& model, const TimeSeries& ts, int h) {
    if (h < 1) {
        throw ConfigError("forecast horizon must be positive");
    }
    const auto filtered = ets_filter(ts.values, model.form, model.period, model.params, model.initial);
    Forecast out;
    out.method = model.form.has_trend() ? (model.form.has_season() ? MethodId::ets_aaa : MethodId::ets_aan)
                                        : (model.form.has_season() ? MethodId::ets_ana : MethodId::ets_ann);
    out.values = ets_forecast_function(filtered.final_state, h);
    FitInfo info;
    info.model = model.form.name();
    info.params["alpha"] = model.params.alpha;
    if (model.form.has_trend()) {
        info.params["beta"] = model.params.beta;
    }
    if (model.form.has_season()) {
        info.params["gamma"] = model.params.gamma;
    }
    info.params["sse"] = model.sse;
    info.aic = model.aic;
    out.fit_info = std::move(info);
    return out;
}

EtsSelection select_ets_model(const TimeSeries& ts, const EtsFitOptions& options) {
    const bool seasonal_ok = ts.seasonal_period >= 2 &&
                             ts.size() >= 2 * static_cast<std::size_t>(ts.seasonal_period);
    std::vector<EtsForm> forms{ets_ann, ets_aan};
    if (seasonal_ok) {
        forms.push_back(ets_ana);
        forms.push_back(ets_aaa);
    }
    EtsSelection out;
    std::string last_error = "no candidate models";
    for (const auto& form : forms) {
        try {
            out.candidates.push_back(fit_ets(ts, form, options));
        } catch (const Error& e) {
            last_error = e.what();
        }
    }
    if (out.candidates.empty()) {
        throw FitError("automatic ETS selection failed for series '" + ts.id + "': " + last_error);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.candidates.size(); ++i) {
        if (out.candidates[i].aic < out.candidates[best].aic) {
            best = i;
        }
    }
    out.winner = out.candidates[best];
    return out;
}

Forecast select_ets_auto(const TimeSeries& ts, int h, const EtsFitOptions& options) {
    const auto selection = select_ets_model(ts, options);
    Forecast out = forecast_ets(selection.winner, ts, h);
    out.method = MethodId::ets_auto;
    out.fit_info->note = "selected " + selection.winner.form.name() + " by AIC";
    return out;
}

} // namespace tsmeta
