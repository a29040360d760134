#include "tsmeta/accuracy.hpp"

#include "csv.hpp"
#include "tsmeta/error.hpp"
#include "tsmeta/parallel.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

namespace tsmeta {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

void check_pair(std::span<const double> actual, std::span<const double> forecast) {
    if (actual.empty() || actual.size() != forecast.size()) {
        throw ConfigError("actual and forecast must have the same non-zero length");
    }
}

std::string format_value(double v) { return std::isfinite(v) ? fmt::format("{}", v) : "NA"; }

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    return out;
}

} // namespace

std::string_view to_string(Measure m) { return m == Measure::smape ? "smape" : "mase"; }

Measure parse_measure(std::string_view name) {
    if (name == "smape") {
        return Measure::smape;
    }
    if (name == "mase") {
        return Measure::mase;
    }
    throw ConfigError("unknown error measure '" + std::string(name) + "'");
}

double mape(std::span<const double> actual, std::span<const double> forecast) {
    check_pair(actual, forecast);
    double sum = 0.0;
    for (std::size_t k = 0; k < actual.size(); ++k) {
        if (actual[k] == 0.0) {
            throw DataError("MAPE undefined: actual value is zero at step " + std::to_string(k + 1));
        }
        sum += 100.0 * std::abs(actual[k] - forecast[k]) / std::abs(actual[k]);
    }
    return sum / static_cast<double>(actual.size());
}

double smape(std::span<const double> actual, std::span<const double> forecast) {
    check_pair(actual, forecast);
    double sum = 0.0;
    for (std::size_t k = 0; k < actual.size(); ++k) {
        const double denom = std::abs(actual[k] + forecast[k]);
        if (denom == 0.0) {
            throw DataError("sMAPE undefined: actual + forecast is zero at step " + std::to_string(k + 1));
        }
        sum += 200.0 * std::abs(actual[k] - forecast[k]) / denom;
    }
    return sum / static_cast<double>(actual.size());
}

double seasonal_mase(std::span<const double> actual, std::span<const double> forecast,
                     std::span<const double> insample, int s) {
    check_pair(actual, forecast);
    if (s < 1 || insample.size() <= static_cast<std::size_t>(s)) {
        throw DataError("MASE needs more in-sample observations than the seasonal period");
    }
    const auto lag = static_cast<std::size_t>(s);
    double scale = 0.0;
    for (std::size_t t = lag; t < insample.size(); ++t) {
        scale += std::abs(insample[t] - insample[t - lag]);
    }
    scale /= static_cast<double>(insample.size() - lag);
    if (!(scale > 0.0)) {
        throw DataError("MASE undefined: in-sample seasonal naive error is zero");
    }
    double mae = 0.0;
    for (std::size_t k = 0; k < actual.size(); ++k) {
        mae += std::abs(actual[k] - forecast[k]);
    }
    return mae / static_cast<double>(actual.size()) / scale;
}

std::vector<EvaluationRecord> evaluate_pool(const Collection& collection, std::span<const MethodId> methods,
                                            const OriginConfig& origins, const ForecasterConfig& config,
                                            std::vector<ForecastRow>* forecasts, unsigned threads) {
    if (origins.horizon < 1 || origins.origins < 1) {
        throw ConfigError("horizon and number of origins must be positive");
    }
    std::vector<MethodId> ordered(methods.begin(), methods.end());
    std::sort(ordered.begin(), ordered.end());
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

    std::vector<std::vector<OriginSplit>> splits;
    splits.reserve(collection.size());
    for (const auto& ts : collection) {
        splits.push_back(rolling_origins(ts, origins.horizon, origins.origins, origins.effective_step()));
    }

    struct Outcome {
        double smape = nan;
        double mase = nan;
        std::string smape_error;
        std::string mase_error;
        std::vector<ForecastRow> rows;
    };
    const std::size_t n_methods = ordered.size();
    std::vector<Outcome> outcomes(collection.size() * n_methods);

    parallel_for(
        outcomes.size(),
        [&](std::size_t task) {
            const auto& ts = collection[task / n_methods];
            const MethodId method = ordered[task % n_methods];
            Outcome& out = outcomes[task];
            double smape_sum = 0.0, mase_sum = 0.0;
            for (const auto& split : splits[task / n_methods]) {
                std::vector<double> fc;
                try {
                    fc = run_forecaster(method, split.train, origins.horizon, config).values;
                } catch (const std::exception& e) {
                    out.smape_error = out.mase_error = e.what();
                    return;
                }
                if (forecasts != nullptr) {
                    for (std::size_t k = 0; k < fc.size(); ++k) {
                        out.rows.push_back({ts.id, method, split.origin_index, static_cast<int>(k + 1), fc[k]});
                    }
                }
                // a perfect forecast scores 0 even where the measure's denominator vanishes
                const bool exact = std::equal(fc.begin(), fc.end(), split.test.begin());
                if (out.smape_error.empty() && !exact) {
                    try {
                        smape_sum += smape(split.test, fc) / 100.0;
                    } catch (const DataError& e) {
                        out.smape_error = e.what();
                    }
                }
                if (out.mase_error.empty() && !exact) {
                    try {
                        mase_sum += seasonal_mase(split.test, fc, split.train.values, ts.seasonal_period);
                    } catch (const DataError& e) {
                        out.mase_error = e.what();
                    }
                }
            }
            const auto count = static_cast<double>(splits[task / n_methods].size());
            if (out.smape_error.empty()) {
                out.smape = smape_sum / count;
            }
            if (out.mase_error.empty()) {
                out.mase = mase_sum / count;
            }
        },
        threads);

    std::vector<EvaluationRecord> records;
    records.reserve(outcomes.size() * 2);
    for (std::size_t task = 0; task < outcomes.size(); ++task) {
        const auto& ts = collection[task / n_methods];
        const MethodId method = ordered[task % n_methods];
        const auto& o = outcomes[task];
        for (Measure m : all_measures) {
            const std::string& err = m == Measure::smape ? o.smape_error : o.mase_error;
            if (!err.empty()) {
                spdlog::warn("{} on series {} failed for {}: {}", to_string(method), ts.id, to_string(m), err);
            }
            records.push_back({ts.id, method, m, m == Measure::smape ? o.smape : o.mase, !err.empty()});
        }
        if (forecasts != nullptr) {
            forecasts->insert(forecasts->end(), o.rows.begin(), o.rows.end());
        }
    }
    return records;
}

RankingTable rank_methods(std::span<const EvaluationRecord> records, Measure measure) {
    std::map<MethodId, std::pair<double, std::size_t>> acc;
    for (const auto& r : records) {
        if (r.measure != measure) {
            continue;
        }
        auto& slot = acc[r.method];
        if (!r.failed) {
            slot.first += r.value;
            ++slot.second;
        }
    }
    RankingTable table;
    table.measure = measure;
    for (const auto& [method, sum] : acc) {
        table.rows.push_back({method, sum.second > 0 ? sum.first / static_cast<double>(sum.second) : nan});
    }
    // std::map iterates in registry order, so a stable sort keeps ties in that order
    std::stable_sort(table.rows.begin(), table.rows.end(), [](const RankingRow& a, const RankingRow& b) {
        if (std::isnan(a.mean_error) || std::isnan(b.mean_error)) {
            return !std::isnan(a.mean_error) && std::isnan(b.mean_error);
        }
        return a.mean_error < b.mean_error;
    });
    return table;
}

MethodId best_label(std::span<const EvaluationRecord> records, const std::string& series_id,
                    std::span<const MethodId> pool, Measure measure) {
    if (pool.empty()) {
        throw ConfigError("forecaster pool is empty");
    }
    std::vector<MethodId> members(pool.begin(), pool.end());
    std::sort(members.begin(), members.end());
    std::optional<MethodId> best;
    double best_value = 0.0;
    for (MethodId m : members) {
        const auto it = std::find_if(records.begin(), records.end(), [&](const EvaluationRecord& r) {
            return r.series_id == series_id && r.method == m && r.measure == measure;
        });
        if (it == records.end()) {
            throw DataError("no " + std::string(to_string(measure)) + " record for " + std::string(to_string(m)) +
                            " on series '" + series_id + "'");
        }
        if (it->failed) {
            continue;
        }
        if (!best || it->value < best_value) {
            best = m;
            best_value = it->value;
        }
    }
    if (!best) {
        throw DataError("every pool member failed on series '" + series_id + "'");
    }
    return *best;
}

void write_records_csv(const std::filesystem::path& path, std::span<const EvaluationRecord> records) {
    auto out = open_output(path);
    out << "series_id,method,measure,value,failed\n";
    for (const auto& r : records) {
        out << csv::quote_if_needed(r.series_id) << ',' << to_string(r.method) << ',' << to_string(r.measure)
            << ',' << format_value(r.value) << ',' << (r.failed ? 1 : 0) << '\n';
    }
}

std::vector<EvaluationRecord> read_records_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::string line;
    std::getline(in, line);
    if (csv::trim(line) != "series_id,method,measure,value,failed") {
        throw ParseError(path.string(), 1, "unexpected header");
    }
    std::vector<EvaluationRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) {
            continue;
        }
        const auto f = csv::split(line);
        if (f.size() != 5) {
            throw ParseError(path.string(), line_no, "expected 5 fields");
        }
        EvaluationRecord r;
        try {
            r.series_id = f[0];
            r.method = parse_method(f[1]);
            r.measure = parse_measure(f[2]);
        } catch (const ConfigError& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
        r.failed = f[4] == "1";
        const auto v = csv::parse_double(f[3]);
        r.value = v ? *v : nan;
        if (!v && !r.failed) {
            throw ParseError(path.string(), line_no, "invalid value '" + f[3] + "'");
        }
        records.push_back(std::move(r));
    }
    return records;
}

void write_ranking_csv(const std::filesystem::path& path, const RankingTable& table) {
    auto out = open_output(path);
    out << "rank,method,mean_error\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        out << i + 1 << ',' << to_string(table.rows[i].method) << ',' << format_value(table.rows[i].mean_error)
            << '\n';
    }
}

void write_forecasts_csv(const std::filesystem::path& path, std::span<const ForecastRow> rows) {
    auto out = open_output(path);
    out << "series_id,method,origin,step,value\n";
    for (const auto& r : rows) {
        out << csv::quote_if_needed(r.series_id) << ',' << to_string(r.method) << ',' << r.origin << ','
            << r.step << ',' << format_value(r.value) << '\n';
    }
}

} // namespace tsmeta
