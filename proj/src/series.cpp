#include "tsmeta/series.hpp"

#include "csv.hpp"
#include "tsmeta/error.hpp"
#include "tsmeta/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

namespace tsmeta {

bool TimeSeries::has_missing() const {
    return std::any_of(values.begin(), values.end(), [](double v) { return !std::isfinite(v); });
}

CsvFormat parse_csv_format(const std::string& name) {
    if (name == "long-csv" || name == "long") {
        return CsvFormat::long_csv;
    }
    if (name == "wide-csv" || name == "wide") {
        return CsvFormat::wide_csv;
    }
    throw ConfigError("unknown data format '" + name + "' (expected long-csv or wide-csv)");
}

std::string to_string(CsvFormat format) {
    return format == CsvFormat::long_csv ? "long-csv" : "wide-csv";
}

namespace {

double parse_cell(const std::string& cell, const std::string& file, std::size_t line) {
    const auto text = csv::trim(cell);
    if (text.empty() || text == "NA") {
        return missing_value;
    }
    const auto v = csv::parse_double(text);
    if (!v) {
        throw ParseError(file, line, "cannot parse value '" + std::string(text) + "'");
    }
    return std::isfinite(*v) ? *v : missing_value;
}

bool blank(const std::string& line) {
    return csv::trim(line).empty();
}

Collection load_long(std::istream& in, const std::string& file, int seasonal_period) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!blank(line)) {
            break;
        }
    }
    const auto header = csv::split(line);
    if (header.size() != 3 || header[0] != "series_id" || header[1] != "t" || header[2] != "value") {
        throw ParseError(file, line_no, "expected header 'series_id,t,value'");
    }

    std::map<std::string, std::map<long, double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) {
            continue;
        }
        const auto fields = csv::split(line);
        if (fields.size() != 3) {
            throw ParseError(file, line_no,
                             "expected 3 fields, found " + std::to_string(fields.size()));
        }
        if (fields[0].empty()) {
            throw ParseError(file, line_no, "empty series_id");
        }
        const auto t = csv::parse_long(fields[1]);
        if (!t) {
            throw ParseError(file, line_no, "cannot parse time index '" + fields[1] + "'");
        }
        const double value = parse_cell(fields[2], file, line_no);
        auto& series = rows[fields[0]];
        if (!series.emplace(*t, value).second) {
            throw ParseError(file, line_no,
                             "duplicate observation (" + fields[0] + ", " + fields[1] + ")");
        }
    }

    Collection out;
    out.reserve(rows.size());
    for (auto& [id, obs] : rows) {
        TimeSeries ts;
        ts.id = id;
        ts.seasonal_period = seasonal_period;
        ts.start_index = obs.begin()->first;
        ts.values.reserve(obs.size());
        for (const auto& [t, v] : obs) {
            ts.values.push_back(v);
        }
        out.push_back(std::move(ts));
    }
    return out;
}

Collection load_wide(std::istream& in, const std::string& file, int seasonal_period) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!blank(line)) {
            break;
        }
    }
    if (blank(line)) {
        return {};
    }
    const auto header = csv::split(line);
    std::unordered_set<std::string> seen;
    Collection out(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c].empty()) {
            throw ParseError(file, line_no, "empty series id in header column " + std::to_string(c + 1));
        }
        if (!seen.insert(header[c]).second) {
            throw ParseError(file, line_no, "duplicate series id '" + header[c] + "'");
        }
        out[c].id = header[c];
        out[c].seasonal_period = seasonal_period;
        out[c].start_index = 1;
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) {
            continue;
        }
        const auto fields = csv::split(line);
        if (fields.size() != header.size()) {
            throw ParseError(file, line_no,
                             "expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            out[c].values.push_back(parse_cell(fields[c], file, line_no));
        }
    }
    return out;
}

} // namespace

Collection load_collection(const std::filesystem::path& path, CsvFormat format,
                           int seasonal_period) {
    if (seasonal_period < 1) {
        throw ConfigError("seasonal period must be positive");
    }
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open data file " + path.string());
    }
    const std::string file = path.string();
    Collection out = format == CsvFormat::long_csv ? load_long(in, file, seasonal_period)
                                                   : load_wide(in, file, seasonal_period);
    if (out.empty()) {
        throw DataError("no series found in " + file);
    }
    return out;
}

TimeSeries impute_missing(const TimeSeries& ts) {
    double sum = 0.0;
    std::size_t count = 0;
    for (double v : ts.values) {
        if (std::isfinite(v)) {
            sum += v;
            ++count;
        }
    }
    if (count == 0) {
        throw DataError("series '" + ts.id + "' has no observed values; mean undefined");
    }
    const double mean = sum / static_cast<double>(count);
    TimeSeries out = ts;
    for (double& v : out.values) {
        if (!std::isfinite(v)) {
            v = mean;
        }
    }
    return out;
}

std::size_t rolling_origin_min_length(int horizon, int n_origins, int step, int seasonal_period) {
    return static_cast<std::size_t>(horizon) +
           static_cast<std::size_t>(n_origins - 1) * static_cast<std::size_t>(step) +
           2 * static_cast<std::size_t>(seasonal_period);
}

std::vector<OriginSplit> rolling_origins(const TimeSeries& ts, int horizon, int n_origins,
                                         int step) {
    if (horizon < 1 || n_origins < 1 || step < 1) {
        throw ConfigError("horizon, origin count and step must be positive");
    }
    const std::size_t need = rolling_origin_min_length(horizon, n_origins, step, ts.seasonal_period);
    if (ts.size() < need) {
        throw InsufficientLengthError(ts.size(), need);
    }
    std::vector<OriginSplit> splits;
    splits.reserve(static_cast<std::size_t>(n_origins));
    for (int k = 0; k < n_origins; ++k) {
        const std::size_t origin = ts.size() - static_cast<std::size_t>(horizon) -
                                   static_cast<std::size_t>(k) * static_cast<std::size_t>(step);
        OriginSplit split;
        split.origin_index = origin;
        split.train = ts;
        split.train.values.assign(ts.values.begin(), ts.values.begin() + static_cast<long>(origin));
        split.test.assign(ts.values.begin() + static_cast<long>(origin),
                          ts.values.begin() + static_cast<long>(origin) + horizon);
        splits.push_back(std::move(split));
    }
    return splits;
}

CollectionSplit split_collection(std::span<const std::string> ids, double test_ratio,
                                 std::uint64_t seed) {
    if (!(test_ratio > 0.0 && test_ratio < 1.0)) {
        throw ConfigError("test ratio must lie strictly between 0 and 1");
    }
    if (ids.size() < 2) {
        throw DataError("need at least two series to split");
    }
    const std::set<std::string> unique(ids.begin(), ids.end());
    if (unique.size() != ids.size()) {
        throw DataError("duplicate series ids in split input");
    }
    const auto n = ids.size();
    auto n_test = static_cast<std::size_t>(std::llround(test_ratio * static_cast<double>(n)));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    shuffle(std::span<std::size_t>(order), rng);
    std::vector<bool> is_test(n, false);
    for (std::size_t i = 0; i < n_test; ++i) {
        is_test[order[i]] = true;
    }

    CollectionSplit out;
    out.seed = seed;
    for (std::size_t i = 0; i < n; ++i) {
        (is_test[i] ? out.test_ids : out.train_ids).push_back(ids[i]);
    }
    return out;
}

} // namespace tsmeta
