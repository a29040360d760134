#include "tsmeta/temporal.hpp"

#include "tsmeta/error.hpp"
#include "tsmeta/ets.hpp"
#include "tsmeta/theta.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace tsmeta {

std::vector<double> temporal_aggregate(std::span<const double> y, int k, bool mean) {
    if (k < 1) {
        throw ConfigError("aggregation level must be positive");
    }
    const auto width = static_cast<std::size_t>(k);
    const std::size_t buckets = y.size() / width;
    const std::size_t skip = y.size() - buckets * width;
    std::vector<double> out(buckets, 0.0);
    for (std::size_t b = 0; b < buckets; ++b) {
        double sum = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
            sum += y[skip + b * width + j];
        }
        out[b] = mean ? sum / static_cast<double>(k) : sum;
    }
    return out;
}

int aggregated_period(int seasonal_period, int k) {
    if (seasonal_period % k == 0 && seasonal_period / k > 1) {
        return seasonal_period / k;
    }
    return 1;
}

Forecast forecast_mapa(const TimeSeries& ts, int h, int max_level, const ForecasterConfig& config) {
    if (h < 1) {
        throw ConfigError("forecast horizon must be positive");
    }
    if (max_level < 1) {
        throw ConfigError("MAPA needs max_level >= 1");
    }
    const auto hs = static_cast<std::size_t>(h);
    std::vector<double> level_sum(hs, 0.0), trend_sum(hs, 0.0), season_sum(hs, 0.0);
    int fitted = 0;
    int seasonal_levels = 0;
    std::string models;
    EtsFitOptions options;
    options.restarts = config.restarts;
    options.seed = config.seed;

    for (int k = 1; k <= max_level; ++k) {
        TimeSeries agg;
        agg.id = ts.id;
        agg.values = temporal_aggregate(ts.values, k, true);
        agg.seasonal_period = aggregated_period(ts.seasonal_period, k);
        if (agg.size() < 4) {
            continue;
        }
        EtsSelection selection;
        try {
            selection = select_ets_model(agg, options);
        } catch (const FitError&) {
            continue;
        }
        const auto& model = selection.winner;
        const auto state = ets_filter(agg.values, model.form, model.period, model.params, model.initial).final_state;
        const double per_step = state.trend / k;
        const double centre = (k - 1) / 2.0;
        const bool seasonal = agg.seasonal_period > 1 && agg.size() >= 2 * static_cast<std::size_t>(agg.seasonal_period);
        for (std::size_t j = 1; j <= hs; ++j) {
            level_sum[j - 1] += state.level;
            trend_sum[j - 1] += per_step * (static_cast<double>(j) + centre);
            if (seasonal && !state.seasonal.empty()) {
                const std::size_t agg_step = (j + static_cast<std::size_t>(k) - 1) / static_cast<std::size_t>(k);
                season_sum[j - 1] += state.seasonal[(agg_step - 1) % state.seasonal.size()];
            }
        }
        ++fitted;
        seasonal_levels += seasonal ? 1 : 0;
        models += (models.empty() ? "" : ",") + std::to_string(k) + ":" + model.form.name();
    }
    if (fitted == 0) {
        throw InsufficientLengthError(ts.size(), 4);
    }

    Forecast out;
    out.method = MethodId::mapa;
    out.values.resize(hs);
    for (std::size_t j = 0; j < hs; ++j) {
        const double s = seasonal_levels > 0 ? season_sum[j] / seasonal_levels : 0.0;
        // (level + trend) + season, the same association as the ETS forecast function
        out.values[j] = (level_sum[j] / fitted + trend_sum[j] / fitted) + s;
    }
    FitInfo info;
    info.model = "mapa";
    info.params["levels"] = fitted;
    info.params["seasonal_levels"] = seasonal_levels;
    info.note = models;
    out.fit_info = std::move(info);
    return out;
}

std::vector<double> reconcile_structural(const std::vector<std::vector<double>>& summing,
                                         std::span<const double> lambda,
                                         std::span<const double> stacked) {
    const auto rows = summing.size();
    if (rows == 0 || lambda.size() != rows || stacked.size() != rows) {
        throw ConfigError("reconciliation inputs have inconsistent sizes");
    }
    const auto cols = summing.front().size();
    Eigen::MatrixXd s(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    Eigen::VectorXd w(static_cast<Eigen::Index>(rows));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
        if (summing[i].size() != cols || !(lambda[i] > 0.0)) {
            throw ConfigError("summing matrix rows must agree and scales must be positive");
        }
        for (std::size_t j = 0; j < cols; ++j) {
            s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = summing[i][j];
        }
        w(static_cast<Eigen::Index>(i)) = 1.0 / lambda[i];
        y(static_cast<Eigen::Index>(i)) = stacked[i];
    }
    const Eigen::MatrixXd st_w = s.transpose() * w.asDiagonal();
    const Eigen::VectorXd bottom = (st_w * s).ldlt().solve(st_w * y);
    return {bottom.data(), bottom.data() + bottom.size()};
}

ThiefDetail thief_detail(const TimeSeries& ts, int h, const ForecasterConfig& config) {
    if (h < 1) {
        throw ConfigError("forecast horizon must be positive");
    }
    const int s = std::max(ts.seasonal_period, 1);
    if (ts.size() < 2 * static_cast<std::size_t>(s)) {
        throw InsufficientLengthError(ts.size(), 2 * static_cast<std::size_t>(s));
    }
    const int cycles = (h + s - 1) / s;
    ThetaOptions options;
    options.restarts = config.restarts;
    options.seed = config.seed;

    ThiefDetail detail;
    for (int k = s; k >= 1; --k) {
        if (s % k != 0) {
            continue;
        }
        TimeSeries agg;
        agg.id = ts.id;
        agg.values = temporal_aggregate(ts.values, k, false);
        agg.seasonal_period = s / k;
        if (agg.size() < 3) {
            continue;  // too few aggregates for a trend line; level dropped
        }
        detail.levels.push_back(k);
        detail.base.push_back(forecast_theta(agg, cycles * (s / k), options).values);
    }

    // one cycle's summing matrix, largest aggregation first
    std::vector<std::vector<double>> summing;
    std::vector<double> lambda;
    for (int k : detail.levels) {
        for (int node = 0; node < s / k; ++node) {
            std::vector<double> row(static_cast<std::size_t>(s), 0.0);
            std::fill_n(row.begin() + node * k, k, 1.0);
            summing.push_back(std::move(row));
            lambda.push_back(k);
        }
    }

    detail.reconciled.assign(detail.levels.size(), {});
    for (int c = 0; c < cycles; ++c) {
        std::vector<double> stacked;
        for (std::size_t l = 0; l < detail.levels.size(); ++l) {
            const int nodes = s / detail.levels[l];
            const auto first = detail.base[l].begin() + c * nodes;
            stacked.insert(stacked.end(), first, first + nodes);
        }
        const auto bottom = reconcile_structural(summing, lambda, stacked);
        detail.bottom.insert(detail.bottom.end(), bottom.begin(), bottom.end());
        for (std::size_t l = 0; l < detail.levels.size(); ++l) {
            const int k = detail.levels[l];
            for (int node = 0; node < s / k; ++node) {
                double sum = 0.0;
                for (int j = 0; j < k; ++j) {
                    sum += bottom[static_cast<std::size_t>(node * k + j)];
                }
                detail.reconciled[l].push_back(sum);
            }
        }
    }
    return detail;
}

Forecast forecast_thief(const TimeSeries& ts, int h, const ForecasterConfig& config) {
    auto detail = thief_detail(ts, h, config);
    Forecast out;
    out.method = MethodId::thief;
    out.values.assign(detail.bottom.begin(), detail.bottom.begin() + h);
    FitInfo info;
    info.model = "thief";
    info.params["levels"] = static_cast<double>(detail.levels.size());
    out.fit_info = std::move(info);
    return out;
}

} // namespace tsmeta
