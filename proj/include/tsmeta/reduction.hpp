#pragma once

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsmeta {

/// OneR weight per feature, in the column order given to oner_weights.
struct FeatureWeights {
    std::vector<std::string> names;
    std::vector<double> weights;

    double at(std::string_view name) const;
};

/// Training accuracy of the one-feature rule that maps each equal-frequency
/// bin to its majority label. Bin i covers values up to the sorted value at
/// position ceil(i*n/bins) (right-closed); majority ties go to the smaller label.
FeatureWeights oner_weights(const Eigen::MatrixXd& x, std::span<const int> labels,
                            std::span<const std::string> names, int bins = 5);

/// The twelve features retained for every pool in the reference study.
inline constexpr std::array<std::string_view, 12> paper12_features{
    "curvature", "diff1_acf10", "e_acf1",  "e_acf10", "entropy",   "seasonal_strength1",
    "seasonal_strength2", "trend", "x_acf1", "x_acf10", "seas_acf1", "linearity",
};

/// k highest weights, earlier columns first on ties.
std::vector<std::string> select_top_k(const FeatureWeights& weights, std::size_t k);

/// Validates a named subset against the available names and returns it in
/// the requested order. Throws ConfigError for unknown names.
std::vector<std::string> select_named(std::span<const std::string> requested,
                                      std::span<const std::string> available);

/// Standardize-then-eigendecompose PCA. All components are kept in the
/// model; `k` of them are used by pca_transform.
struct PcaModel {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;
    Eigen::MatrixXd components;  // columns, descending variance
    Eigen::VectorXd explained_ratio;
    int k = 1;
};

/// k is the smallest count whose cumulative explained variance reaches the
/// threshold (at least 1). Each component's largest-magnitude loading is positive.
PcaModel fit_pca(const Eigen::MatrixXd& x, double cumvar_threshold = 0.999);

/// Rows projected onto the first model.k components (rows x k).
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x);

std::string pca_to_json(const PcaModel& model);
PcaModel pca_from_json(const std::string& text);

void write_weights_csv(const std::filesystem::path& path, const FeatureWeights& weights);

} // namespace tsmeta
