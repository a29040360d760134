#include "doctest.h"

#include "tsmeta/error.hpp"
#include "tsmeta/features.hpp"
#include "tsmeta/random.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

using namespace tsmeta;

namespace {

TimeSeries make(std::vector<double> v, int s = 7) {
    TimeSeries ts;
    ts.id = "f";
    ts.values = std::move(v);
    ts.seasonal_period = s;
    return ts;
}

std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> y(n);
    for (double& v : y) {
        v = normal01(rng);
    }
    return y;
}

double variance(const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) {
        s += (x - m) * (x - m);
    }
    return s / static_cast<double>(v.size() - 1);
}

} // namespace

TEST_CASE("acf examples") {
    std::vector<double> alt(20);
    for (std::size_t i = 0; i < alt.size(); ++i) {
        alt[i] = i % 2 == 0 ? 1.0 : -1.0;
    }
    CHECK(acf(alt, 1) == doctest::Approx(-0.95));  // biased denominator: 19/20
    CHECK(acf(alt, 0) == 1.0);
    const std::vector<double> flat(10, 3.0);
    CHECK_THROWS_AS(acf(flat, 1), DataError);
    CHECK_THROWS_AS(acf(alt, 20), DataError);
}

TEST_CASE("decompose recovers a sinusoid and reconstructs exactly") {
    const int s = 7;
    std::vector<double> y(70);
    for (std::size_t t = 0; t < y.size(); ++t) {
        y[t] = 10.0 + std::sin(2.0 * M_PI * static_cast<double>(t) / s);
    }
    const auto d = decompose(make(y, s));
    for (std::size_t t = s; t + s < y.size(); ++t) {
        CHECK(std::abs(d.remainder[t]) < 1e-6);
    }
    for (std::size_t t = 0; t < y.size(); ++t) {
        CHECK(d.trend[t] + d.seasonal[t] + d.seasonal2[t] + d.remainder[t] == doctest::Approx(y[t]).epsilon(1e-12));
    }
    CHECK_THROWS_AS(decompose(make({1, 2, 3, 4, 5, 6, 7, 8}, 7)), InsufficientLengthError);
}

TEST_CASE("decompose of white noise attributes little variance to seasonality") {
    int small = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto y = white_noise(140, seed);
        const auto d = decompose(make(y, 7));
        small += variance(d.seasonal) < 0.3 * variance(y) ? 1 : 0;
    }
    CHECK(small > 10);
}

TEST_CASE("features of a noiseless linear series") {
    std::vector<double> y(100);
    std::iota(y.begin(), y.end(), 1.0);
    const auto f = extract_features(make(y, 7));
    CHECK(f["trend"] >= 0.99);
    CHECK(f["seasonal_strength1"] <= 0.1);
    CHECK(f["frequency"] == 7.0);
    CHECK(f["nperiods"] == 1.0);
    CHECK(f["seasonal_period1"] == 7.0);
    CHECK(f["seasonal_period2"] == 0.0);
    CHECK(f["linearity"] > 0.0);
}

TEST_CASE("white noise has high spectral entropy") {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        total += extract_features(make(white_noise(791, seed + 100), 7))["entropy"];
    }
    CHECK(total / 20.0 > 0.9);
}

TEST_CASE("strictly periodic series: strength and peak position") {
    const double pattern[] = {1.0, 4.0, 2.0, 9.0, 3.0, 0.5, 2.5};
    std::vector<double> y(98);
    for (std::size_t t = 0; t < y.size(); ++t) {
        y[t] = 20.0 + pattern[t % 7];
    }
    const auto f = extract_features(make(y, 7));
    CHECK(f["seasonal_strength1"] >= 0.99);
    CHECK(f["peak1"] == 4.0);
    CHECK(f["trough1"] == 6.0);
    CHECK(f["seas_acf1"] > 0.9);
}

TEST_CASE("second seasonality populates the second-period fields") {
    std::vector<double> y(168);
    for (std::size_t t = 0; t < y.size(); ++t) {
        y[t] = 5.0 + std::sin(2.0 * M_PI * t / 4.0) + 2.0 * std::sin(2.0 * M_PI * t / 12.0) + 0.01 * t;
    }
    auto ts = make(y, 4);
    ts.seasonal_period2 = 12;
    const auto f = extract_features(ts);
    CHECK(f["nperiods"] == 2.0);
    CHECK(f["seasonal_period2"] == 12.0);
    CHECK(f["seasonal_strength2"] > 0.5);
    const auto d = decompose(ts);
    for (std::size_t t = 0; t < y.size(); ++t) {
        CHECK(d.trend[t] + d.seasonal[t] + d.seasonal2[t] + d.remainder[t] == doctest::Approx(y[t]));
    }
}

TEST_CASE("feature ranges hold on random series") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const auto n = 28 + static_cast<std::size_t>(uniform_below(rng, 150));
        std::vector<double> y(n);
        const double drift = normal01(rng), amp = 3.0 * uniform01(rng);
        double walk = 0.0;
        const bool random_walk = uniform01(rng) < 0.3;
        for (std::size_t t = 0; t < n; ++t) {
            walk += normal01(rng);
            y[t] = drift * static_cast<double>(t) / 10.0 + amp * std::sin(2.0 * M_PI * t / 7.0) +
                   (random_walk ? walk : normal01(rng));
        }
        const auto f = extract_features(make(y, 7));
        for (double v : f.values) {
            REQUIRE(std::isfinite(v));
        }
        for (const char* name : {"trend", "seasonal_strength1", "seasonal_strength2", "entropy"}) {
            CHECK(f[name] >= 0.0);
            CHECK(f[name] <= 1.0);
        }
        for (const char* name : {"x_acf1", "e_acf1", "diff1_acf1", "diff2_acf1", "seas_acf1"}) {
            CHECK(f[name] >= -1.0);
            CHECK(f[name] <= 1.0);
        }
    }
}

TEST_CASE("ACF features are invariant to a level shift") {
    auto y = white_noise(120, 3);
    const auto a = extract_features(make(y, 7));
    for (double& v : y) {
        v += 1000.0;
    }
    const auto b = extract_features(make(y, 7));
    for (const char* name : {"x_acf1", "x_acf10", "diff1_acf1", "diff1_acf10", "diff2_acf1", "diff2_acf10", "seas_acf1",
                             "e_acf1", "e_acf10"}) {
        CHECK(a[name] == doctest::Approx(b[name]).epsilon(1e-8));
    }
}

TEST_CASE("constant series falls back to zeros") {
    const auto f = extract_features(make(std::vector<double>(50, 4.0), 7));
    for (const char* name : {"x_acf1", "entropy", "trend", "seasonal_strength1", "e_acf1"}) {
        CHECK(f[name] == 0.0);
    }
}

TEST_CASE("feature_matrix constant-column report") {
    Collection c;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        c.push_back(make(white_noise(140, seed), 7));
        c.back().id = "s" + std::to_string(seed);
    }
    const auto m = feature_matrix(c, 1);
    REQUIRE(m.rows.size() == 6);
    for (const char* name : {"frequency", "nperiods", "seasonal_period1"}) {
        CHECK(m.constant[feature_index(name)]);
    }
    for (const char* name : {"trend", "entropy", "x_acf1"}) {
        CHECK_FALSE(m.constant[feature_index(name)]);
    }
    const auto single = feature_matrix({c.front()}, 1);
    CHECK(single.active_columns().empty());
    const auto twins = feature_matrix({c.front(), c.front()}, 1);
    CHECK(twins.active_columns().empty());

    const auto path = std::filesystem::temp_directory_path() / "tsmeta_features_test.csv";
    write_feature_csv(path, m);
    const auto back = read_feature_csv(path);
    REQUIRE(back.rows.size() == m.rows.size());
    CHECK(back.series_ids == m.series_ids);
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        for (std::size_t j = 0; j < feature_count; ++j) {
            CHECK(back.rows[i].values[j] == m.rows[i].values[j]);
        }
    }
    std::filesystem::remove(path);
}

TEST_CASE("feature_matrix flags a failing series and keeps the rest") {
    Collection c{make(white_noise(140, 1), 7), make({1, 2, 3, 4, 5}, 7), make(white_noise(140, 2), 7)};
    c[1].id = "short";
    const auto m = feature_matrix(c, 1);
    REQUIRE(m.failed.size() == 3);
    CHECK_FALSE(m.failed[0]);
    CHECK(m.failed[1]);
    CHECK(std::isnan(m.rows[1]["trend"]));
    CHECK_FALSE(m.constant[feature_index("trend")]);

    const auto path = std::filesystem::temp_directory_path() / "tsmeta_features_failed.csv";
    write_feature_csv(path, m);
    const auto back = read_feature_csv(path);
    CHECK(back.failed == m.failed);
    std::filesystem::remove(path);
}
