#include "doctest.h"

#include "tsmeta/error.hpp"
#include "tsmeta/pipeline.hpp"
#include "tsmeta/random.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

using namespace tsmeta;

namespace {

// Series whose seasonal amplitude decides which method scores best, so the
// labels are learnable from the features.
struct Synthetic {
    FeatureMatrix features;
    std::vector<EvaluationRecord> records;
};

Synthetic synthetic(std::size_t n_series, std::uint64_t seed) {
    Rng rng(seed);
    Collection c;
    std::vector<double> amp;
    for (std::size_t i = 0; i < n_series; ++i) {
        TimeSeries ts;
        ts.id = "s" + std::to_string(i);
        const double a = 3.0 * uniform01(rng);
        amp.push_back(a);
        for (int t = 0; t < 140; ++t) {
            ts.values.push_back(20.0 + a * std::sin(2.0 * M_PI * t / 7.0) + normal01(rng) + 0.02 * t);
        }
        c.push_back(ts);
    }
    Synthetic out;
    out.features = feature_matrix(c, 1);
    for (std::size_t i = 0; i < n_series; ++i) {
        for (std::size_t m = 0; m < all_methods.size(); ++m) {
            for (Measure measure : all_measures) {
                const double centre = 3.0 * static_cast<double>(m) / static_cast<double>(all_methods.size());
                const double scale = measure == Measure::smape ? 0.1 : 1.0;
                out.records.push_back({c[i].id, static_cast<MethodId>(m), measure,
                                       scale * (0.2 + std::abs(amp[i] - centre) + 0.05 * uniform01(rng)), false});
            }
        }
    }
    return out;
}

RankingTable ranking_of(std::vector<MethodId> order) {
    RankingTable t;
    double e = 0.1;
    for (MethodId m : order) {
        t.rows.push_back({m, e});
        e += 0.1;
    }
    return t;
}

} // namespace

TEST_CASE("build_pools rosters") {
    const auto pools = build_pools(ranking_of({MethodId::mapa, MethodId::naive, MethodId::thief, MethodId::snaive,
                                               MethodId::ets_auto, MethodId::sma, MethodId::theta, MethodId::dotm,
                                               MethodId::ets_aaa, MethodId::ets_ann}));
    REQUIRE(pools.size() == 4);
    CHECK(pools[0].members == std::vector<MethodId>{MethodId::mapa, MethodId::thief, MethodId::ets_auto, MethodId::theta});
    CHECK(pools[1].members.size() == 6);
    CHECK(pools[1].members[5] == MethodId::ets_aaa);
    CHECK(pools[2].members.size() == 7);
    CHECK(pools[2].members.back() == MethodId::snaive);
    CHECK(pools[3].members ==
          std::vector<MethodId>{MethodId::ets_ann, MethodId::ets_ana, MethodId::ets_aan, MethodId::ets_aaa});
    CHECK_THROWS_AS(build_pools(ranking_of({MethodId::mapa, MethodId::thief, MethodId::naive})), ConfigError);
}

TEST_CASE("boundary examples") {
    const auto data = synthetic(12, 1);
    std::vector<std::string> ids{"s0", "s1", "s2", "s3"};
    const std::vector<MethodId> single{MethodId::theta};
    const std::vector<MethodId> always(ids.size(), MethodId::theta);
    CHECK(boundary(data.records, single, ids, Measure::mase) ==
          doctest::Approx(selection_error(data.records, single, ids, always, Measure::mase)));

    const std::vector<MethodId> small{MethodId::mapa, MethodId::thief};
    const std::vector<MethodId> big{MethodId::mapa, MethodId::thief, MethodId::theta, MethodId::snaive};
    const double b_small = boundary(data.records, small, ids, Measure::smape);
    CHECK(boundary(data.records, big, ids, Measure::smape) <= b_small);
    for (MethodId m : small) {
        const std::vector<MethodId> fixed(ids.size(), m);
        CHECK(b_small <= selection_error(data.records, small, ids, fixed, Measure::smape));
    }
    CHECK_THROWS_AS(boundary(data.records, small, {}, Measure::smape), ConfigError);
    const std::vector<std::string> unknown{"nope"};
    CHECK_THROWS_AS(boundary(data.records, small, unknown, Measure::smape), DataError);
}

TEST_CASE("a failed recommendation is charged the worst pool value") {
    std::vector<EvaluationRecord> r{{"a", MethodId::mapa, Measure::smape, 0.1, false},
                                    {"a", MethodId::thief, Measure::smape, 0.3, false},
                                    {"a", MethodId::theta, Measure::smape, std::nan(""), true}};
    const std::vector<MethodId> pool{MethodId::mapa, MethodId::thief, MethodId::theta};
    const std::vector<std::string> ids{"a"};
    const std::vector<MethodId> chosen{MethodId::theta};
    CHECK(selection_error(r, pool, ids, chosen, Measure::smape) == doctest::Approx(0.3));
    CHECK(boundary(r, pool, ids, Measure::smape) == doctest::Approx(0.1));
}

TEST_CASE("build_inputs variant structure") {
    const auto data = synthetic(30, 2);
    const auto pools = build_pools(rank_methods(data.records, Measure::smape));
    const auto split = split_collection(data.features.series_ids, 0.2, 5);
    const std::vector<Measure> measures{Measure::smape, Measure::mase};
    const auto variants = build_inputs(data.features, data.records, pools, measures, all_reductions, split);
    CHECK(variants.size() == 3 * 3 * 2 + 2);
    for (const auto& v : variants) {
        CHECK(v.train.labels.size() == static_cast<std::size_t>(v.train.x.rows()));
        CHECK(v.test.labels.size() == static_cast<std::size_t>(v.test.x.rows()));
        CHECK(v.test_ids.size() == 6);
        for (int l : v.train.labels) {
            CHECK(std::find(v.pool.members.begin(), v.pool.members.end(), static_cast<MethodId>(l)) !=
                  v.pool.members.end());
        }
        if (v.reduction == Reduction::raw) {
            std::vector<FeatureVector> train_rows;
            for (const auto& id : v.train_ids) {
                const auto pos = std::find(data.features.series_ids.begin(), data.features.series_ids.end(), id) -
                                 data.features.series_ids.begin();
                train_rows.push_back(data.features.rows[static_cast<std::size_t>(pos)]);
            }
            const auto constant = constant_columns(train_rows);
            CHECK(static_cast<std::size_t>(v.train.x.cols()) ==
                  static_cast<std::size_t>(std::count(constant.begin(), constant.end(), false)));
            CHECK(v.train.x(0, 0) == train_rows[0].values[feature_index(v.train.feature_names[0])]);
        }
        if (v.reduction == Reduction::pca) {
            REQUIRE(v.pca);
            CHECK(v.train.x.cols() == v.pca->k);
        }
        if (v.reduction == Reduction::feature_selection) {
            CHECK(v.train.x.cols() == 12);
            CHECK(std::find(v.train.feature_names.begin(), v.train.feature_names.end(), "seasonal_strength2") ==
                  v.train.feature_names.end());
        }
    }
}

TEST_CASE("label distribution percentages") {
    InputVariant v;
    v.pool = {PoolId::top4, {MethodId::mapa, MethodId::thief, MethodId::ets_auto, MethodId::theta}};
    v.test.labels.assign(22, registry_rank(MethodId::thief));
    for (int i = 0; i < 4; ++i) {
        v.test.labels[static_cast<std::size_t>(i)] = registry_rank(MethodId::mapa);
    }
    const auto shares = label_distribution(v);
    REQUIRE(shares.size() == 4);
    CHECK(shares[0].percent == doctest::Approx(18.18).epsilon(1e-3));
    double total = 0.0;
    for (const auto& s : shares) {
        total += s.percent;
    }
    CHECK(total == doctest::Approx(100.0));
    InputVariant one;
    one.pool = {PoolId::top4, {MethodId::mapa}};
    one.test.labels.assign(3, registry_rank(MethodId::mapa));
    CHECK(label_distribution(one)[0].percent == 100.0);
}

TEST_CASE("outperformance and decreasing-pattern counts") {
    ExperimentReport report;
    auto add_pool = [&](PoolId pool, int members) {
        for (int i = 0; i < members; ++i) {
            report.individuals.push_back({pool, Measure::smape, static_cast<MethodId>(i), 0.1 * (i + 1)});
        }
    };
    add_pool(PoolId::top4, 4);
    add_pool(PoolId::top6, 6);
    add_pool(PoolId::top6_snaive, 7);
    auto learner = [&](LearnerKind k, PoolId p, double e) {
        LearnerResult r;
        r.learner = k;
        r.pool = p;
        r.test_error = e;
        report.learners.push_back(r);
    };
    learner(LearnerKind::decision_tree, PoolId::top4, 0.05);  // beats all 4
    learner(LearnerKind::decision_tree, PoolId::top6, 0.04);
    learner(LearnerKind::decision_tree, PoolId::top6_snaive, 0.25);  // beats 5 of 7
    learner(LearnerKind::mlp, PoolId::top4, 0.9);  // beats none
    learner(LearnerKind::mlp, PoolId::top6, 0.9);
    learner(LearnerKind::mlp, PoolId::top6_snaive, 0.9);
    const auto table = outperformance_table(report);
    REQUIRE(table.size() == 6);
    CHECK(table[0].percent == 100);
    CHECK(table[2].percent == 71);
    CHECK(table[3].percent == 0);

    auto patterns = detect_decreasing_pattern(report);
    REQUIRE(patterns.size() == 1);
    CHECK(patterns[0].learners == 0);
    report.learners[2].test_error = 0.03;
    patterns = detect_decreasing_pattern(report);
    CHECK(patterns[0].learners == 1);
}

TEST_CASE("run_experiment invariants and table output") {
    const auto data = synthetic(40, 3);
    ExperimentConfig config;
    config.cv = {3, 1, 7, 1};
    config.learners = {LearnerKind::decision_tree, LearnerKind::random_forest, LearnerKind::svm};
    const auto report = run_experiment(data.features, data.records, config);
    CHECK(report.variants.size() == 20);
    CHECK(report.learners.size() == 60);
    for (const auto& r : report.learners) {
        CHECK(r.error.empty());
        double b = 0.0;
        for (const auto& x : report.boundaries) {
            if (x.pool == r.pool && x.measure == r.measure) {
                b = x.value;
            }
        }
        CHECK(b <= r.test_error + 1e-12);
    }
    for (const auto& i : report.individuals) {
        for (const auto& x : report.boundaries) {
            if (x.pool == i.pool && x.measure == i.measure) {
                CHECK(x.value <= i.test_error + 1e-12);
            }
        }
    }

    const auto again = run_experiment(data.features, data.records, config);
    CHECK(report_to_json(report) == report_to_json(again));

    const auto dir = std::filesystem::temp_directory_path() / "tsmeta_tables_test";
    std::filesystem::remove_all(dir);
    const auto files = write_tables(report, dir);
    CHECK(files.size() == table_files.size());
    std::ifstream t3(dir / "table3_top4.csv");
    std::string header;
    std::getline(t3, header);
    CHECK(header == "model,smape,smape_fs,smape_pca,mase,mase_fs,mase_pca");
    std::filesystem::remove_all(dir);

    ExperimentConfig basic = config;
    basic.pools = {PoolId::basic};
    const auto basic_report = run_experiment(data.features, data.records, basic);
    const auto basic_dir = std::filesystem::temp_directory_path() / "tsmeta_tables_basic";
    std::filesystem::remove_all(basic_dir);
    const auto basic_files = write_tables(basic_report, basic_dir);
    int tables = 0;
    for (const auto& f : basic_files) {
        tables += f.filename().string().rfind("table", 0) == 0 ? 1 : 0;
    }
    CHECK(tables == 1);
    CHECK(std::filesystem::exists(basic_dir / "table6_basic.csv"));
    std::filesystem::remove_all(basic_dir);
}
