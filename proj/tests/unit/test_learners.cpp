#include "doctest.h"

#include "tsmeta/error.hpp"
#include "tsmeta/learners.hpp"
#include "tsmeta/random.hpp"

#include <cmath>

using namespace tsmeta;

namespace {

MetaDataset two_clusters(int n, std::uint64_t seed, int p = 4) {
    Rng rng(seed);
    MetaDataset d;
    d.x.resize(n, p);
    for (int i = 0; i < n; ++i) {
        const int label = i % 2 == 0 ? 3 : 7;
        d.labels.push_back(label);
        for (int j = 0; j < p; ++j) {
            d.x(i, j) = normal01(rng) + (label == 7 && j == 0 ? 5.0 : 0.0);
        }
    }
    return d;
}

MetaDataset xor_data(int n, std::uint64_t seed) {
    Rng rng(seed);
    MetaDataset d;
    d.x.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * uniform01(rng) - 1.0, b = 2.0 * uniform01(rng) - 1.0;
        d.x(i, 0) = a;
        d.x(i, 1) = b;
        d.labels.push_back((a > 0) != (b > 0) ? 1 : 0);
    }
    return d;
}

double accuracy(const TrainedModel& m, const MetaDataset& d) {
    const auto pred = m.predict_rows(d.x);
    int ok = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        ok += pred[i] == d.labels[i] ? 1 : 0;
    }
    return static_cast<double>(ok) / static_cast<double>(pred.size());
}

const CvSpec quick{3, 1, 42, 1};

} // namespace

TEST_CASE("every learner separates two well-spaced clusters") {
    const auto data = two_clusters(200, 1);
    for (LearnerKind kind : all_learners) {
        CAPTURE(to_string(kind));
        const auto model = train(kind, data, quick);
        CHECK(model.cv_accuracy >= 0.95);
        CHECK(accuracy(model, data) >= 0.95);
        for (int label : model.predict_rows(data.x)) {
            CHECK((label == 3 || label == 7));
        }
    }
}

TEST_CASE("decision tree learns XOR while a stump cannot") {
    const auto data = xor_data(400, 2);
    std::vector<Hyperparameters> deep;
    for (double depth : {2.0, 4.0, 8.0, 0.0}) {
        deep.push_back({{"max_depth", depth}, {"min_leaf", 1}});
    }
    const auto model = train(LearnerKind::decision_tree, data, quick, deep);
    CHECK(model.hyperparameters.at("max_depth") != 1.0);
    CHECK(model.cv_accuracy >= 0.95);
    const auto stump = train(LearnerKind::decision_tree, data, quick, {{{"max_depth", 1}, {"min_leaf", 1}}});
    CHECK(stump.cv_accuracy <= 0.6);
}

TEST_CASE("single-label data gives a constant predictor") {
    MetaDataset d;
    d.x = Eigen::MatrixXd::Random(10, 3);
    d.labels.assign(10, 4);
    const auto model = train(LearnerKind::svm, d, quick);
    CHECK(model.cv_accuracy == 1.0);
    CHECK(model.predict(Eigen::VectorXd::Zero(3)) == 4);
    CHECK(model.predict(Eigen::VectorXd::Constant(3, 100.0)) == 4);
}

TEST_CASE("training argument validation") {
    const auto data = two_clusters(10, 4);
    CHECK_THROWS_AS(train(LearnerKind::decision_tree, data, {11, 1, 1, 1}), ConfigError);
    CHECK_THROWS_AS(train(LearnerKind::decision_tree, data, {1, 1, 1, 1}), ConfigError);
    const auto model = train(LearnerKind::decision_tree, data, quick);
    CHECK_THROWS_AS(model.predict(Eigen::VectorXd::Zero(3)), ConfigError);
    CHECK_THROWS_AS(parse_learner("knn"), ConfigError);
    CHECK(parse_learner("treebag") == LearnerKind::treebag);
}

TEST_CASE("a fully grown tree memorizes its training rows") {
    const auto data = xor_data(60, 5);
    const auto model = fit_classifier(LearnerKind::decision_tree, {{"max_depth", 0}, {"min_leaf", 1}}, data.x,
                                      data.labels, 1);
    for (Eigen::Index i = 0; i < data.x.rows(); ++i) {
        CHECK(model->predict(data.x.row(i).transpose()) == data.labels[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("one-tree ensemble without bootstrap equals the single tree") {
    const auto data = xor_data(150, 6);
    const auto tree = fit_classifier(LearnerKind::decision_tree, {{"max_depth", 3}}, data.x, data.labels, 1);
    const auto forest = fit_classifier(LearnerKind::random_forest,
                                       {{"trees", 1}, {"mtry", 2}, {"bootstrap", 0}, {"max_depth", 3}}, data.x,
                                       data.labels, 99);
    const auto probe = xor_data(200, 7);
    for (Eigen::Index i = 0; i < probe.x.rows(); ++i) {
        CHECK(tree->predict(probe.x.row(i).transpose()) == forest->predict(probe.x.row(i).transpose()));
    }
}

TEST_CASE("gradient boosting training loss never increases") {
    MetaDataset d = two_clusters(120, 8, 3);
    for (std::size_t i = 0; i < d.labels.size(); i += 3) {
        d.labels[i] = 5;  // three classes with overlap
    }
    for (double depth : {1.0, 3.0}) {
        const auto model = fit_classifier(LearnerKind::gbt, {{"max_depth", depth}, {"shrinkage", 0.3}, {"rounds", 50}},
                                          d.x, d.labels, 1);
        const auto loss = model->training_loss();
        REQUIRE(loss.size() > 1);
        for (std::size_t r = 1; r < loss.size(); ++r) {
            CHECK(loss[r] <= loss[r - 1]);
        }
    }
}

TEST_CASE("MLP analytic gradient matches central differences") {
    Rng rng(12);
    const int p = 4, hidden = 5, classes = 3;
    Eigen::MatrixXd x(3, p);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x(i) = normal01(rng);
    }
    const std::vector<int> targets{0, 2, 1};
    Eigen::VectorXd params(hidden * p + hidden + classes * hidden + classes);
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        params(i) = 0.5 * normal01(rng);
    }
    Eigen::VectorXd grad;
    mlp_loss_gradient(params, x, targets, hidden, classes, 1e-3, &grad);
    const double step = 1e-5;
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        Eigen::VectorXd up = params, down = params;
        up(i) += step;
        down(i) -= step;
        const double numeric = (mlp_loss_gradient(up, x, targets, hidden, classes, 1e-3, nullptr) -
                                mlp_loss_gradient(down, x, targets, hidden, classes, 1e-3, nullptr)) /
                               (2.0 * step);
        const double denom = std::max({std::abs(numeric), std::abs(grad(i)), 1e-8});
        CHECK(std::abs(numeric - grad(i)) / denom < 1e-4);
    }
}

TEST_CASE("identical seeds give identical models") {
    const auto data = xor_data(120, 13);
    const auto probe = xor_data(100, 14);
    for (LearnerKind kind : all_learners) {
        CAPTURE(to_string(kind));
        const auto a = train(kind, data, quick);
        const auto b = train(kind, data, quick);
        CHECK(a.cv_accuracy == b.cv_accuracy);
        CHECK(a.hyperparameters == b.hyperparameters);
        CHECK(a.predict_rows(probe.x) == b.predict_rows(probe.x));
        CHECK(model_metadata_json(a) == model_metadata_json(b));
    }
}

TEST_CASE("confusion matrix conservation") {
    const auto data = two_clusters(100, 15);
    const auto model = train(LearnerKind::decision_tree, data, quick);
    const auto cm = confusion_matrix(model, data);
    REQUIRE(cm.labels == std::vector<int>{3, 7});
    std::size_t total = 0;
    for (std::size_t i = 0; i < 2; ++i) {
        std::size_t row = 0;
        for (std::size_t j = 0; j < 2; ++j) {
            row += cm.counts[i][j];
            if (i != j) {
                CHECK(cm.counts[i][j] == 0);
            }
        }
        CHECK(row == 50);
        total += row;
    }
    CHECK(total == 100);
}
