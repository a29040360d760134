#include "doctest.h"

#include "tsmeta/error.hpp"
#include "tsmeta/random.hpp"
#include "tsmeta/reduction.hpp"

#include <cmath>

using namespace tsmeta;

TEST_CASE("OneR weights: separating, independent and constant features") {
    const int n = 200;
    Eigen::MatrixXd x(n, 3);
    std::vector<int> labels(n);
    Rng rng(11);
    for (int i = 0; i < n; ++i) {
        labels[static_cast<std::size_t>(i)] = i < 80 ? 0 : 1;  // boundary lands on a bin edge
        x(i, 0) = i + 0.5 * uniform01(rng);
        x(i, 1) = normal01(rng);
        x(i, 2) = 1.0;
    }
    const std::vector<std::string> names{"sep", "noise", "flat"};
    const auto w = oner_weights(x, labels, names);
    CHECK(w.at("sep") == 1.0);
    CHECK(w.at("flat") == doctest::Approx(120.0 / 200.0));
    for (double v : w.weights) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    const std::vector<int> one(n, 3);
    CHECK_THROWS_AS(oner_weights(x, one, names), DataError);
}

TEST_CASE("OneR weight of an independent feature is near one half") {
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const int n = 500;
        Eigen::MatrixXd x(n, 1);
        std::vector<int> labels(n);
        for (int i = 0; i < n; ++i) {
            x(i, 0) = normal01(rng);
            labels[static_cast<std::size_t>(i)] = i % 2;
        }
        const std::vector<std::string> names{"z"};
        const double w = oner_weights(x, labels, names).weights[0];
        inside += w >= 0.4 && w <= 0.6 ? 1 : 0;
    }
    CHECK(inside > 10);
}

TEST_CASE("OneR is invariant under monotone transforms") {
    Rng rng(5);
    const int n = 120;
    Eigen::MatrixXd x(n, 1), ex(n, 1);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = normal01(rng);
        ex(i, 0) = std::exp(2.0 * x(i, 0)) + 3.0;
        labels[static_cast<std::size_t>(i)] = static_cast<int>(uniform_below(rng, 3));
    }
    const std::vector<std::string> names{"v"};
    CHECK(oner_weights(x, labels, names).weights[0] == oner_weights(ex, labels, names).weights[0]);
}

TEST_CASE("feature selection") {
    FeatureWeights w{{"a", "b"}, {0.9, 0.1}};
    CHECK(select_top_k(w, 1) == std::vector<std::string>{"a"});
    FeatureWeights tie{{"x", "y", "z"}, {0.5, 0.7, 0.5}};
    CHECK(select_top_k(tie, 3) == std::vector<std::string>{"y", "x", "z"});

    const std::vector<std::string> preset(paper12_features.begin(), paper12_features.end());
    CHECK(preset.size() == 12);
    std::vector<std::string> available = preset;
    available.push_back("spike");
    CHECK(select_named(preset, available) == preset);
    const std::vector<std::string> bad{"trend", "nope"};
    CHECK_THROWS_AS(select_named(bad, available), ConfigError);
}

TEST_CASE("PCA on collinear points keeps one component") {
    Eigen::MatrixXd x(5, 2);
    for (int i = 0; i < 5; ++i) {
        x(i, 0) = i;
        x(i, 1) = 3.0 * i + 1.0;
    }
    const auto m = fit_pca(x, 0.999);
    CHECK(m.k == 1);
    CHECK(m.explained_ratio(0) == doctest::Approx(1.0));
    CHECK(fit_pca(x, 0.0).k == 1);
    Eigen::MatrixXd flat = Eigen::MatrixXd::Ones(4, 2);
    CHECK_THROWS_AS(fit_pca(flat), DataError);
}

TEST_CASE("PCA on an isotropic sample keeps every component") {
    Rng rng(3);
    Eigen::MatrixXd x(400, 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) {
            x(i, j) = normal01(rng);
        }
    }
    const auto m = fit_pca(x, 0.99);
    CHECK(m.k == 3);
    CHECK((m.components.transpose() * m.components - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
    for (Eigen::Index i = 0; i + 1 < m.explained_ratio.size(); ++i) {
        CHECK(m.explained_ratio(i) >= m.explained_ratio(i + 1));
    }
    CHECK(m.explained_ratio.sum() <= 1.0 + 1e-12);
    for (Eigen::Index c = 0; c < 3; ++c) {
        Eigen::Index arg = 0;
        m.components.col(c).cwiseAbs().maxCoeff(&arg);
        CHECK(m.components(arg, c) > 0.0);
    }
}

TEST_CASE("PCA transform properties") {
    Rng rng(9);
    Eigen::MatrixXd x(50, 4);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double a = normal01(rng), b = normal01(rng);
        x(i, 0) = 100.0 * a;
        x(i, 1) = 0.01 * (a + b);
        x(i, 2) = b + 0.1 * normal01(rng);
        x(i, 3) = normal01(rng);
    }
    auto m = fit_pca(x, 1.0);
    m.k = 4;
    const Eigen::MatrixXd t = pca_transform(m, x);
    CHECK(t.colwise().mean().cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::MatrixXd centred = t.rowwise() - t.colwise().mean();
    const Eigen::MatrixXd cov = centred.transpose() * centred / 49.0;
    for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) {
            if (i != j) {
                CHECK(std::abs(cov(i, j)) < 1e-8);
            }
        }
    }
    const Eigen::MatrixXd z = (x.rowwise() - m.mean.transpose()).array().rowwise() / m.scale.transpose().array();
    CHECK((t * m.components.transpose() - z).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(pca_transform(m, m.mean.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(pca_transform(m, Eigen::MatrixXd::Zero(2, 3)), ConfigError);

    const auto back = pca_from_json(pca_to_json(m));
    CHECK(back.k == m.k);
    CHECK((pca_transform(back, x) - t).cwiseAbs().maxCoeff() < 1e-12);
}
