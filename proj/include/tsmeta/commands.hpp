#pragma once

#include "tsmeta/accuracy.hpp"
#include "tsmeta/features.hpp"
#include "tsmeta/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tsmeta {

/// Everything one invocation of the tool needs. Values come from the
/// defaults, then an optional JSON config file, then command-line flags.
struct RunConfig {
    std::filesystem::path data;
    CsvFormat format = CsvFormat::long_csv;
    int horizon = 56;
    int origins = 3;
    int step = 0;  // 0 means step = horizon
    int season = 7;
    int season2 = 0;
    double test_ratio = 0.2;
    std::uint64_t seed = 20190601;        // learners and cross-validation
    std::uint64_t split_seed = 20190601;  // train/test partition
    std::vector<MethodId> methods{all_methods.begin(), all_methods.end()};
    std::vector<PoolId> pools{all_pools.begin(), all_pools.end()};
    std::vector<Measure> measures{all_measures.begin(), all_measures.end()};
    std::vector<Reduction> reductions{all_reductions.begin(), all_reductions.end()};
    std::vector<LearnerKind> learners{all_learners.begin(), all_learners.end()};
    int folds = 10;
    int repeats = 5;
    ReductionConfig reduction;
    ForecasterConfig forecaster;
    unsigned threads = 0;
    bool use_cache = true;
    std::filesystem::path out = "out";
};

/// Throws ConfigError naming the first invalid field.
void validate(const RunConfig& config);

/// Applies the keys of a JSON object on top of `base`; unknown keys are
/// rejected.
RunConfig config_from_json(const std::string& text, RunConfig base = {});

std::string config_to_json(const RunConfig& config);

/// Default output directory: $TSMETA_OUT when set, otherwise "out".
std::filesystem::path default_output_dir();

/// Loads, sets the seasonal periods and imputes the collection.
Collection load_prepared(const RunConfig& config);

struct EvaluateResult {
    std::vector<EvaluationRecord> records;
    std::vector<RankingTable> rankings;
    std::vector<std::string> skipped;  // series too short for the origins
    bool cache_hit = false;
};

/// Phase one. Writes records.csv and ranking_<measure>.csv under config.out.
EvaluateResult cmd_evaluate(const RunConfig& config);

struct FeaturesResult {
    FeatureMatrix matrix;
    bool cache_hit = false;
};

/// Phase two. Writes features.csv and constant_columns.json under config.out.
FeaturesResult cmd_features(const RunConfig& config);

/// Phase three, running the first two on demand. Writes report.json and the
/// table CSVs under config.out.
ExperimentReport cmd_run(const RunConfig& config);

/// Human-readable summary of config.out/report.json.
std::string cmd_report(const RunConfig& config);

} // namespace tsmeta
