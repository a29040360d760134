#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tsmeta {

enum class LearnerKind { decision_tree, random_forest, treebag, gbt, mlp, svm };

inline constexpr std::array<LearnerKind, 6> all_learners{
    LearnerKind::decision_tree, LearnerKind::random_forest, LearnerKind::treebag,
    LearnerKind::gbt,           LearnerKind::mlp,           LearnerKind::svm,
};

std::string_view to_string(LearnerKind kind);
LearnerKind parse_learner(std::string_view name);

/// Features plus integer class labels. Smaller label values come first in
/// every tie-break ("canonical order").
struct MetaDataset {
    Eigen::MatrixXd x;
    std::vector<int> labels;
    std::vector<std::string> feature_names;
    std::string pool;
    std::string measure;
    std::string reduction;
};

using Hyperparameters = std::map<std::string, double>;

struct CvSpec {
    int folds = 10;
    int repeats = 5;
    std::uint64_t seed = 20190601;
    unsigned threads = 0;
};

class Classifier {
public:
    virtual ~Classifier() = default;
    virtual int predict(const Eigen::VectorXd& row) const = 0;
    virtual Eigen::Index dimension() const = 0;
    /// Training loss after each accepted boosting round (first entry is the
    /// prior-only model). Empty for learners without such a trace.
    virtual std::vector<double> training_loss() const { return {}; }
};

struct TrainedModel {
    LearnerKind learner = LearnerKind::decision_tree;
    Hyperparameters hyperparameters;
    double cv_accuracy = 0.0;
    std::vector<int> classes;
    std::shared_ptr<const Classifier> model;

    /// Throws ConfigError on a dimension mismatch.
    int predict(const Eigen::VectorXd& row) const;
    std::vector<int> predict_rows(const Eigen::MatrixXd& x) const;
};

/// Tuning grid in evaluation order; p is the feature count.
std::vector<Hyperparameters> default_grid(LearnerKind kind, Eigen::Index p);

/// Fits one learner with fixed hyperparameters. Single-class data yields a
/// constant predictor.
std::shared_ptr<const Classifier> fit_classifier(LearnerKind kind, const Hyperparameters& hyper,
                                                 const Eigen::MatrixXd& x, std::span<const int> labels,
                                                 std::uint64_t seed);

/// Repeated k-fold CV over the grid (mean fold accuracy, first grid point on
/// ties), then a refit of the winner on all rows.
TrainedModel train(LearnerKind kind, const MetaDataset& data, const CvSpec& cv,
                   const std::vector<Hyperparameters>& grid = {});

struct ConfusionMatrix {
    std::vector<int> labels;                      // ascending
    std::vector<std::vector<std::size_t>> counts;  // [true][predicted]
};

ConfusionMatrix confusion_matrix(const TrainedModel& model, const MetaDataset& test);

/// One row per true label under an `actual,<label>...` header; `names` maps labels to column names.
void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm,
                         const std::function<std::string(int)>& names);

std::string model_metadata_json(const TrainedModel& model);

/// Mean softmax cross-entropy (plus l2/2 * |weights|^2) of a one-hidden-layer
/// tanh network and its gradient. Parameters are packed as W1 (hidden x p,
/// column-major), b1, W2 (classes x hidden, column-major), b2. `targets`
/// holds class indices in [0, classes).
double mlp_loss_gradient(const Eigen::VectorXd& params, const Eigen::MatrixXd& x, std::span<const int> targets,
                         int hidden, int classes, double l2, Eigen::VectorXd* gradient);

} // namespace tsmeta
