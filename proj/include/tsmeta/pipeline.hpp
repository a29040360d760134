#pragma once

#include "tsmeta/accuracy.hpp"
#include "tsmeta/features.hpp"
#include "tsmeta/learners.hpp"
#include "tsmeta/reduction.hpp"
#include "tsmeta/series.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsmeta {

enum class PoolId { top4, top6, top6_snaive, basic };

inline constexpr std::array<PoolId, 4> all_pools{PoolId::top4, PoolId::top6, PoolId::top6_snaive, PoolId::basic};
inline constexpr std::array<PoolId, 3> main_pools{PoolId::top4, PoolId::top6, PoolId::top6_snaive};

std::string_view to_string(PoolId id);
PoolId parse_pool(std::string_view name);

enum class Reduction { raw, feature_selection, pca };

inline constexpr std::array<Reduction, 3> all_reductions{Reduction::raw, Reduction::feature_selection, Reduction::pca};

std::string_view to_string(Reduction r);
/// Accepts "raw", "feature_selection" (or "fs") and "pca".
Reduction parse_reduction(std::string_view name);

struct PoolSpec {
    PoolId id = PoolId::top4;
    std::vector<MethodId> members;  // ranking order; registry order for basic
};

/// The four pools. Top pools draw from the ranking with naive, snaive and sma
/// excluded; top6_snaive appends snaive. Throws ConfigError when fewer than
/// six advanced methods are ranked.
std::vector<PoolSpec> build_pools(const RankingTable& ranking);

struct ReductionConfig {
    /// Named feature subset; empty selects the top_k OneR features instead.
    /// Names that are constant on the training rows are replaced by the
    /// best-weighted remaining features.
    std::vector<std::string> named{paper12_features.begin(), paper12_features.end()};
    std::size_t top_k = 12;
    int oner_bins = 5;
    double pca_threshold = 0.999;
};

struct InputVariant {
    PoolSpec pool;
    Measure measure = Measure::smape;
    Reduction reduction = Reduction::raw;
    MetaDataset train;  // labels are registry ranks of the best pool member
    MetaDataset test;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::optional<FeatureWeights> weights;  // OneR weights on the training rows
    std::optional<PcaModel> pca;
};

/// "<pool>/<measure>/<reduction>".
std::string variant_name(const InputVariant& v);

/// One variant per (pool, measure, reduction) in argument order; the basic
/// pool is raw-only. Series whose features failed or whose pool members all
/// failed are dropped with a warning. Reductions are fit on training rows.
std::vector<InputVariant> build_inputs(const FeatureMatrix& features, std::span<const EvaluationRecord> records,
                                       std::span<const PoolSpec> pools, std::span<const Measure> measures,
                                       std::span<const Reduction> reductions, const CollectionSplit& split,
                                       const ReductionConfig& config = {});

/// Mean over `ids` of the record value of the method chosen for each series.
/// A chosen method that failed on a series is charged the worst successful
/// pool member's value there.
double selection_error(std::span<const EvaluationRecord> records, std::span<const MethodId> pool,
                       std::span<const std::string> ids, std::span<const MethodId> chosen, Measure measure);

/// Mean over test series of the per-series minimum pool error.
double boundary(std::span<const EvaluationRecord> records, std::span<const MethodId> pool,
                std::span<const std::string> test_ids, Measure measure);

struct ExperimentConfig {
    std::vector<PoolId> pools{all_pools.begin(), all_pools.end()};
    std::vector<Measure> measures{all_measures.begin(), all_measures.end()};
    std::vector<Reduction> reductions{all_reductions.begin(), all_reductions.end()};
    std::vector<LearnerKind> learners{all_learners.begin(), all_learners.end()};
    /// Ranking that decides the top pool rosters, shared by both measures.
    Measure pool_ranking = Measure::smape;
    double test_ratio = 0.2;
    std::uint64_t split_seed = 20190601;
    CvSpec cv;
    ReductionConfig reduction;
};

struct LearnerResult {
    LearnerKind learner = LearnerKind::decision_tree;
    PoolId pool = PoolId::top4;
    Measure measure = Measure::smape;
    Reduction reduction = Reduction::raw;
    double cv_accuracy = 0.0;
    double test_accuracy = 0.0;
    double test_error = 0.0;  // NaN when the learner failed
    Hyperparameters hyperparameters;
    std::vector<MethodId> recommendations;  // per test id of the variant
    ConfusionMatrix confusion;
    std::string error;  // non-empty when training failed
};

struct IndividualResult {
    PoolId pool = PoolId::top4;
    Measure measure = Measure::smape;
    MethodId method = MethodId::naive;
    double test_error = 0.0;
};

struct BoundaryResult {
    PoolId pool = PoolId::top4;
    Measure measure = Measure::smape;
    double value = 0.0;
};

struct LabelShare {
    PoolId pool = PoolId::top4;
    Measure measure = Measure::smape;
    MethodId method = MethodId::naive;
    double percent = 0.0;
};

struct VariantSummary {
    PoolId pool = PoolId::top4;
    Measure measure = Measure::smape;
    Reduction reduction = Reduction::raw;
    std::vector<std::string> features;  // input columns
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
};

struct ExperimentReport {
    std::vector<RankingTable> rankings;  // one per measure in the records
    std::vector<PoolSpec> pools;
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::vector<VariantSummary> variants;
    std::vector<BoundaryResult> boundaries;
    std::vector<IndividualResult> individuals;
    std::vector<LearnerResult> learners;
    std::vector<LabelShare> labels;
};

/// Splits the series, builds every requested variant, trains each learner on
/// it and scores the recommendations against the stored records. Learner
/// failures are logged and recorded in the report.
ExperimentReport run_experiment(const FeatureMatrix& features, std::span<const EvaluationRecord> records,
                                const ExperimentConfig& config);

/// Percentages of the test labels per pool member (rows in pool order).
std::vector<LabelShare> label_distribution(const InputVariant& variant);

struct Outperformance {
    LearnerKind learner = LearnerKind::decision_tree;
    PoolId pool = PoolId::top4;
    Measure measure = Measure::smape;
    Reduction reduction = Reduction::raw;
    int percent = 0;  // pool members whose error strictly exceeds the learner's
};

std::vector<Outperformance> outperformance_table(const ExperimentReport& report);

struct PatternCount {
    Measure measure = Measure::smape;
    Reduction reduction = Reduction::raw;
    int learners = 0;  // strictly decreasing over top4, top6, top6_snaive
};

/// Only (measure, reduction) cells covered by all three main pools appear.
std::vector<PatternCount> detect_decreasing_pattern(const ExperimentReport& report);

std::string report_to_json(const ExperimentReport& report);

/// Writes the table CSVs present in the report and returns their paths.
std::vector<std::filesystem::path> write_tables(const ExperimentReport& report, const std::filesystem::path& dir);

/// Names of the table files write_tables can produce.
inline constexpr std::array<std::string_view, 11> table_files{
    "table2_ranking.csv",           "table3_top4.csv",          "table4_top6.csv",
    "table5_top6_snaive.csv",       "table6_basic.csv",         "table7_label_distribution.csv",
    "table8_outperformance_smape.csv", "table9_outperformance_mase.csv", "table10_decreasing_pattern.csv",
    "confusion_matrices.csv",       "variants.csv",
};

} // namespace tsmeta
