#include "doctest.h"

#include "tsmeta/error.hpp"
#include "tsmeta/series.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace tsmeta;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / ("tsmeta_" + name);
    std::ofstream(path) << body;
    return path;
}

} // namespace

TEST_CASE("long csv loads and sorts by id and time") {
    const auto path = write_temp("long.csv", "series_id,t,value\nB,2,4\nA,2,6.0\nA,1,5.0\nB,1,3e0\n");
    const auto c = load_collection(path, CsvFormat::long_csv);
    REQUIRE(c.size() == 2);
    CHECK(c[0].id == "A");
    CHECK(c[0].values == std::vector<double>{5.0, 6.0});
    CHECK(c[1].values == std::vector<double>{3.0, 4.0});
}

TEST_CASE("long csv rejects duplicate keys") {
    const auto path = write_temp("dup.csv", "series_id,t,value\nA,1,5.0\nA,1,7.0\n");
    CHECK_THROWS_AS(load_collection(path, CsvFormat::long_csv), DataError);
}

TEST_CASE("malformed rows report their line") {
    const auto path = write_temp("bad.csv", "series_id,t,value\nA,1,5.0\nA,x,7.0\n");
    try {
        load_collection(path, CsvFormat::long_csv);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("wide csv keeps column order and marks blanks missing") {
    const auto path = write_temp("wide.csv", "x,y\n1,2\n,NA\n3,4\n");
    const auto c = load_collection(path, CsvFormat::wide_csv);
    REQUIRE(c.size() == 2);
    CHECK(c[0].id == "x");
    CHECK(std::isnan(c[0].values[1]));
    CHECK(std::isnan(c[1].values[1]));
    CHECK(c[1].values[2] == 4.0);
}

TEST_CASE("empty collection is an error") {
    const auto path = write_temp("empty.csv", "series_id,t,value\n");
    CHECK_THROWS_AS(load_collection(path, CsvFormat::long_csv), DataError);
}

TEST_CASE("mean imputation") {
    TimeSeries ts{"a", {1.0, missing_value, 3.0}};
    const auto filled = impute_missing(ts);
    CHECK(filled.values == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(impute_missing(filled).values == filled.values);
    TimeSeries same{"b", {5.0, 5.0, 5.0}};
    CHECK(impute_missing(same).values == same.values);
    TimeSeries none{"c", {missing_value, missing_value}};
    CHECK_THROWS_AS(impute_missing(none), DataError);
}

TEST_CASE("rolling origins recede by step from the end") {
    TimeSeries ts{"a", std::vector<double>(791, 1.0)};
    const auto splits = rolling_origins(ts, 56, 3, 56);
    REQUIRE(splits.size() == 3);
    CHECK(splits[0].origin_index == 735);
    CHECK(splits[1].origin_index == 679);
    CHECK(splits[2].origin_index == 623);
    for (const auto& s : splits) {
        CHECK(s.test.size() == 56);
        CHECK(s.train.size() == s.origin_index);
    }
    CHECK(rolling_origins(ts, 56, 1, 999).front().origin_index == 735);
}

TEST_CASE("rolling origins reject short series with the minimum length") {
    TimeSeries ts{"a", std::vector<double>(100, 1.0)};
    try {
        rolling_origins(ts, 56, 3, 56);
        FAIL("expected insufficient length");
    } catch (const InsufficientLengthError& e) {
        CHECK(e.required() == rolling_origin_min_length(56, 3, 56, 7));
    }
}

TEST_CASE("collection split sizes and determinism") {
    std::vector<std::string> ids;
    for (int i = 0; i < 111; ++i) {
        ids.push_back("s" + std::to_string(i));
    }
    const auto split = split_collection(ids, 0.2, 42);
    CHECK(split.test_ids.size() == 22);
    CHECK(split.train_ids.size() == 89);
    std::set<std::string> all(split.train_ids.begin(), split.train_ids.end());
    all.insert(split.test_ids.begin(), split.test_ids.end());
    CHECK(all.size() == 111);

    std::vector<std::string> ten(ids.begin(), ids.begin() + 10);
    const auto a = split_collection(ten, 0.2, 7);
    const auto b = split_collection(ten, 0.2, 7);
    CHECK(a.test_ids == b.test_ids);
    bool differs = false;
    for (std::uint64_t seed = 8; seed < 40 && !differs; ++seed) {
        differs = split_collection(ten, 0.2, seed).test_ids != a.test_ids;
    }
    CHECK(differs);
}
