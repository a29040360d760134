#include "tsmeta/learners.hpp"

#include "json.hpp"
#include "trees.hpp"
#include "tsmeta/error.hpp"
#include "tsmeta/parallel.hpp"
#include "tsmeta/random.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace tsmeta {

namespace {

constexpr std::array<std::string_view, 6> learner_names{"decision_tree", "random_forest", "treebag",
                                                        "gbt",           "mlp",           "svm"};

double hp(const Hyperparameters& h, const std::string& key, double fallback) {
    const auto it = h.find(key);
    return it == h.end() ? fallback : it->second;
}

/// Index of the largest count; the smallest index wins ties.
template <class Range>
int argmax_first(const Range& values) {
    return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

/// Maps labels to 0..K-1 in ascending label order.
struct LabelCoding {
    std::vector<int> classes;
    std::vector<int> index;

    explicit LabelCoding(std::span<const int> labels) {
        classes.assign(labels.begin(), labels.end());
        std::sort(classes.begin(), classes.end());
        classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
        index.reserve(labels.size());
        for (int l : labels) {
            index.push_back(static_cast<int>(std::lower_bound(classes.begin(), classes.end(), l) - classes.begin()));
        }
    }
    int k() const { return static_cast<int>(classes.size()); }
};

struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    explicit Standardizer(const Eigen::MatrixXd& x) {
        mean = x.colwise().mean();
        scale = ((x.rowwise() - mean).array().square().colwise().sum() / std::max<double>(1.0, static_cast<double>(x.rows() - 1)))
                    .sqrt();
        for (Eigen::Index j = 0; j < scale.size(); ++j) {
            if (!(scale(j) > 0.0)) {
                scale(j) = 1.0;
            }
        }
    }
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
        return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
    }
    Eigen::VectorXd apply(const Eigen::VectorXd& row) const {
        return ((row.transpose() - mean).array() / scale.array()).matrix().transpose();
    }
};

class ConstantClassifier final : public Classifier {
public:
    ConstantClassifier(int label, Eigen::Index dim) : label_(label), dim_(dim) {}
    int predict(const Eigen::VectorXd&) const override { return label_; }
    Eigen::Index dimension() const override { return dim_; }

private:
    int label_;
    Eigen::Index dim_;
};

// ---- trees and forests -------------------------------------------------------

class ForestClassifier final : public Classifier {
public:
    ForestClassifier(std::vector<detail::Tree> trees, std::vector<int> classes, Eigen::Index dim)
        : trees_(std::move(trees)), classes_(std::move(classes)), dim_(dim) {}

    int predict(const Eigen::VectorXd& row) const override {
        std::vector<std::size_t> votes(classes_.size(), 0);
        for (const auto& t : trees_) {
            ++votes[static_cast<std::size_t>(t.predict(row))];
        }
        return classes_[static_cast<std::size_t>(argmax_first(votes))];
    }
    Eigen::Index dimension() const override { return dim_; }

private:
    std::vector<detail::Tree> trees_;
    std::vector<int> classes_;
    Eigen::Index dim_;
};

std::shared_ptr<const Classifier> fit_forest(const Hyperparameters& h, const Eigen::MatrixXd& x,
                                             const LabelCoding& coding, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(x.rows());
    const int count = static_cast<int>(hp(h, "trees", 1));
    const bool bootstrap = hp(h, "bootstrap", 0) != 0.0;
    detail::TreeOptions options;
    options.max_depth = static_cast<int>(hp(h, "max_depth", 0));
    options.min_leaf = static_cast<int>(hp(h, "min_leaf", 1));
    options.mtry = static_cast<int>(hp(h, "mtry", 0));
    std::vector<detail::Tree> trees(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> rows(n);
        if (bootstrap) {
            for (auto& r : rows) {
                r = static_cast<std::size_t>(uniform_below(rng, n));
            }
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        trees[static_cast<std::size_t>(t)].fit_classification(x, coding.index, coding.k(), rows, options, &rng);
    }
    return std::make_shared<ForestClassifier>(std::move(trees), coding.classes, x.cols());
}

// ---- gradient boosting ---------------------------------------------------------

class GbtClassifier final : public Classifier {
public:
    std::vector<int> classes;
    Eigen::VectorXd initial;
    std::vector<std::vector<detail::Tree>> rounds;  // [round][class]
    double shrinkage = 0.1;
    Eigen::Index dim = 0;
    std::vector<double> loss_trace;

    Eigen::VectorXd scores(const Eigen::VectorXd& row) const {
        Eigen::VectorXd f = initial;
        for (const auto& round : rounds) {
            for (std::size_t k = 0; k < round.size(); ++k) {
                f(static_cast<Eigen::Index>(k)) += shrinkage * round[k].predict(row);
            }
        }
        return f;
    }
    int predict(const Eigen::VectorXd& row) const override {
        const Eigen::VectorXd f = scores(row);
        return classes[static_cast<std::size_t>(argmax_first(std::span<const double>(f.data(), f.size())))];
    }
    Eigen::Index dimension() const override { return dim; }
    std::vector<double> training_loss() const override { return loss_trace; }
};

double softmax_loss(const Eigen::MatrixXd& f, std::span<const int> target) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        const double m = f.row(i).maxCoeff();
        const double lse = m + std::log((f.row(i).array() - m).exp().sum());
        loss += lse - f(i, target[static_cast<std::size_t>(i)]);
    }
    return loss / static_cast<double>(f.rows());
}

std::shared_ptr<const Classifier> fit_gbt(const Hyperparameters& h, const Eigen::MatrixXd& x,
                                          const LabelCoding& coding) {
    const auto n = x.rows();
    const int k = coding.k();
    auto model = std::make_shared<GbtClassifier>();
    model->classes = coding.classes;
    model->shrinkage = hp(h, "shrinkage", 0.1);
    model->dim = x.cols();
    const int max_rounds = static_cast<int>(hp(h, "rounds", 200));
    detail::TreeOptions options;
    options.max_depth = static_cast<int>(hp(h, "max_depth", 3));
    options.min_leaf = 1;

    // start from log class priors
    model->initial = Eigen::VectorXd::Zero(k);
    for (int c : coding.index) {
        model->initial(c) += 1.0;
    }
    model->initial = (model->initial.array() / static_cast<double>(n)).log().matrix();
    Eigen::MatrixXd f = model->initial.transpose().replicate(n, 1);
    double loss = softmax_loss(f, coding.index);
    model->loss_trace.push_back(loss);

    std::vector<std::size_t> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<double> residual(static_cast<std::size_t>(n)), hessian(static_cast<std::size_t>(n));
    const double scale = static_cast<double>(k - 1) / k;
    for (int round = 0; round < max_rounds && loss > 1e-8; ++round) {
        Eigen::MatrixXd prob = (f.colwise() - f.rowwise().maxCoeff()).array().exp().matrix();
        prob = (prob.array().colwise() / prob.rowwise().sum().array()).matrix();
        std::vector<detail::Tree> trees(static_cast<std::size_t>(k));
        Eigen::MatrixXd next = f;
        for (int c = 0; c < k; ++c) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const double p = prob(i, c);
                const double y = coding.index[static_cast<std::size_t>(i)] == c ? 1.0 : 0.0;
                residual[static_cast<std::size_t>(i)] = y - p;
                hessian[static_cast<std::size_t>(i)] = p * (1.0 - p);
            }
            auto& tree = trees[static_cast<std::size_t>(c)];
            tree.fit_regression(x, residual, hessian, scale, rows, options);
            for (Eigen::Index i = 0; i < n; ++i) {
                next(i, c) += model->shrinkage * tree.predict(x.row(i).transpose());
            }
        }
        const double next_loss = softmax_loss(next, coding.index);
        if (!(next_loss <= loss)) {
            break;  // reject the round that raised the training loss
        }
        f = std::move(next);
        loss = next_loss;
        model->rounds.push_back(std::move(trees));
        model->loss_trace.push_back(loss);
    }
    return model;
}

// ---- multilayer perceptron -----------------------------------------------------

class MlpClassifier final : public Classifier {
public:
    std::vector<int> classes;
    Eigen::MatrixXd w1, w2;
    Eigen::VectorXd b1, b2;
    Standardizer standardizer{Eigen::MatrixXd::Zero(1, 1)};

    int predict(const Eigen::VectorXd& row) const override {
        const Eigen::VectorXd z = standardizer.apply(row);
        const Eigen::VectorXd a = (w1 * z + b1).array().tanh().matrix();
        const Eigen::VectorXd out = w2 * a + b2;
        return classes[static_cast<std::size_t>(argmax_first(std::span<const double>(out.data(), out.size())))];
    }
    Eigen::Index dimension() const override { return w1.cols(); }
};

std::shared_ptr<const Classifier> fit_mlp(const Hyperparameters& h, const Eigen::MatrixXd& x,
                                          const LabelCoding& coding, std::uint64_t seed) {
    const int hidden = static_cast<int>(hp(h, "hidden", 16));
    const int epochs = static_cast<int>(hp(h, "epochs", 2000));
    const double rate = hp(h, "learning_rate", 0.1);
    const double momentum = hp(h, "momentum", 0.9);
    const double l2 = hp(h, "l2", 1e-4);
    const auto p = static_cast<int>(x.cols());
    const int k = coding.k();

    auto model = std::make_shared<MlpClassifier>();
    model->classes = coding.classes;
    model->standardizer = Standardizer(x);
    const Eigen::MatrixXd z = model->standardizer.apply(x);

    const Eigen::Index n_w1 = static_cast<Eigen::Index>(hidden) * p;
    const Eigen::Index n_w2 = static_cast<Eigen::Index>(k) * hidden;
    const Eigen::Index total = n_w1 + hidden + n_w2 + k;
    Eigen::VectorXd params = Eigen::VectorXd::Zero(total);
    Rng rng(seed);
    const double r1 = std::sqrt(6.0 / (p + hidden));
    const double r2 = std::sqrt(6.0 / (hidden + k));
    for (Eigen::Index i = 0; i < n_w1; ++i) {
        params(i) = (2.0 * uniform01(rng) - 1.0) * r1;
    }
    for (Eigen::Index i = 0; i < n_w2; ++i) {
        params(n_w1 + hidden + i) = (2.0 * uniform01(rng) - 1.0) * r2;
    }
    Eigen::VectorXd velocity = Eigen::VectorXd::Zero(total);
    Eigen::VectorXd grad(total);
    for (int e = 0; e < epochs; ++e) {
        mlp_loss_gradient(params, z, coding.index, hidden, k, l2, &grad);
        velocity = momentum * velocity - rate * grad;
        params += velocity;
    }
    model->w1 = Eigen::Map<const Eigen::MatrixXd>(params.data(), hidden, p);
    model->b1 = params.segment(n_w1, hidden);
    model->w2 = Eigen::Map<const Eigen::MatrixXd>(params.data() + n_w1 + hidden, k, hidden);
    model->b2 = params.segment(n_w1 + hidden + n_w2, k);
    return model;
}

// ---- support vector machine ----------------------------------------------------

struct BinarySvm {
    int positive = 0;  // class index voted for when the decision is > 0
    int negative = 0;
    std::vector<Eigen::VectorXd> vectors;
    std::vector<double> coef;  // alpha_i * y_i
    double rho = 0.0;
};

class SvmClassifier final : public Classifier {
public:
    std::vector<int> classes;
    std::vector<BinarySvm> machines;
    double gamma = 1.0;
    Standardizer standardizer{Eigen::MatrixXd::Zero(1, 1)};

    int predict(const Eigen::VectorXd& row) const override {
        const Eigen::VectorXd z = standardizer.apply(row);
        std::vector<std::size_t> votes(classes.size(), 0);
        for (const auto& m : machines) {
            double f = -m.rho;
            for (std::size_t i = 0; i < m.vectors.size(); ++i) {
                f += m.coef[i] * std::exp(-gamma * (m.vectors[i] - z).squaredNorm());
            }
            ++votes[static_cast<std::size_t>(f > 0.0 ? m.positive : m.negative)];
        }
        return classes[static_cast<std::size_t>(argmax_first(votes))];
    }
    Eigen::Index dimension() const override { return standardizer.mean.size(); }
};

/// Dual C-SVC by SMO with second-order working-set selection.
BinarySvm solve_binary(const Eigen::MatrixXd& kernel, const std::vector<double>& y, double c) {
    const auto n = static_cast<Eigen::Index>(y.size());
    constexpr double tau = 1e-12;
    constexpr double eps = 1e-3;
    std::vector<double> alpha(y.size(), 0.0), grad(y.size(), -1.0);
    auto q = [&](Eigen::Index i, Eigen::Index j) { return y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] * kernel(i, j); };
    auto upper = [&](Eigen::Index i) { return alpha[static_cast<std::size_t>(i)] >= c; };
    auto lower = [&](Eigen::Index i) { return alpha[static_cast<std::size_t>(i)] <= 0.0; };
    const long max_iter = std::max<long>(100000, 100 * n);
    for (long iter = 0; iter < max_iter; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            const auto st = static_cast<std::size_t>(t);
            if (y[st] > 0 ? !upper(t) : !lower(t)) {
                const double v = -y[st] * grad[st];
                if (v >= gmax) {
                    gmax = v;
                    i = t;
                }
            }
        }
        if (i < 0) {
            break;
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        double best_obj = std::numeric_limits<double>::infinity();
        Eigen::Index j = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            const auto st = static_cast<std::size_t>(t);
            if (y[st] > 0 ? !lower(t) : !upper(t)) {
                const double v = y[st] * grad[st];
                gmax2 = std::max(gmax2, v);
                const double diff = gmax + v;
                if (diff > 0.0) {
                    double quad = kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t);
                    quad = quad > 0.0 ? quad : tau;
                    const double obj = -(diff * diff) / quad;
                    if (obj <= best_obj) {
                        best_obj = obj;
                        j = t;
                    }
                }
            }
        }
        if (gmax + gmax2 < eps || j < 0) {
            break;
        }
        const auto si = static_cast<std::size_t>(i);
        const auto sj = static_cast<std::size_t>(j);
        const double old_i = alpha[si], old_j = alpha[sj];
        if (y[si] != y[sj]) {
            double quad = kernel(i, i) + kernel(j, j) + 2.0 * q(i, j);
            quad = quad > 0.0 ? quad : tau;
            const double delta = (-grad[si] - grad[sj]) / quad;
            const double diff = alpha[si] - alpha[sj];
            alpha[si] += delta;
            alpha[sj] += delta;
            if (diff > 0.0) {
                if (alpha[sj] < 0.0) {
                    alpha[sj] = 0.0;
                    alpha[si] = diff;
                }
            } else if (alpha[si] < 0.0) {
                alpha[si] = 0.0;
                alpha[sj] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[si] > c) {
                    alpha[si] = c;
                    alpha[sj] = c - diff;
                }
            } else if (alpha[sj] > c) {
                alpha[sj] = c;
                alpha[si] = c + diff;
            }
        } else {
            double quad = kernel(i, i) + kernel(j, j) - 2.0 * q(i, j);
            quad = quad > 0.0 ? quad : tau;
            const double delta = (grad[si] - grad[sj]) / quad;
            const double sum = alpha[si] + alpha[sj];
            alpha[si] -= delta;
            alpha[sj] += delta;
            if (sum > c) {
                if (alpha[si] > c) {
                    alpha[si] = c;
                    alpha[sj] = sum - c;
                }
            } else if (alpha[sj] < 0.0) {
                alpha[sj] = 0.0;
                alpha[si] = sum;
            }
            if (sum > c) {
                if (alpha[sj] > c) {
                    alpha[sj] = c;
                    alpha[si] = sum - c;
                }
            } else if (alpha[si] < 0.0) {
                alpha[si] = 0.0;
                alpha[sj] = sum;
            }
        }
        const double di = alpha[si] - old_i, dj = alpha[sj] - old_j;
        for (Eigen::Index t = 0; t < n; ++t) {
            grad[static_cast<std::size_t>(t)] += q(i, t) * di + q(j, t) * dj;
        }
    }

    double ub = std::numeric_limits<double>::infinity(), lb = -ub, free_sum = 0.0;
    int free_count = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto st = static_cast<std::size_t>(t);
        const double yg = y[st] * grad[st];
        if (upper(t)) {
            if (y[st] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[st] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++free_count;
            free_sum += yg;
        }
    }
    BinarySvm out;
    out.rho = free_count > 0 ? free_sum / free_count : (ub + lb) / 2.0;
    out.coef = alpha;
    for (std::size_t t = 0; t < alpha.size(); ++t) {
        out.coef[t] = alpha[t] * y[t];
    }
    return out;
}

std::shared_ptr<const Classifier> fit_svm(const Hyperparameters& h, const Eigen::MatrixXd& x,
                                          const LabelCoding& coding) {
    auto model = std::make_shared<SvmClassifier>();
    model->classes = coding.classes;
    model->gamma = hp(h, "gamma", 1.0 / static_cast<double>(x.cols()));
    model->standardizer = Standardizer(x);
    const Eigen::MatrixXd z = model->standardizer.apply(x);
    const double c = hp(h, "C", 1.0);
    for (int a = 0; a < coding.k(); ++a) {
        for (int b = a + 1; b < coding.k(); ++b) {
            std::vector<Eigen::Index> rows;
            std::vector<double> y;
            for (std::size_t i = 0; i < coding.index.size(); ++i) {
                if (coding.index[i] == a || coding.index[i] == b) {
                    rows.push_back(static_cast<Eigen::Index>(i));
                    y.push_back(coding.index[i] == a ? 1.0 : -1.0);
                }
            }
            const auto m = static_cast<Eigen::Index>(rows.size());
            Eigen::MatrixXd kernel(m, m);
            for (Eigen::Index i = 0; i < m; ++i) {
                for (Eigen::Index j = 0; j <= i; ++j) {
                    kernel(i, j) = kernel(j, i) = std::exp(-model->gamma * (z.row(rows[static_cast<std::size_t>(i)]) -
                                                                           z.row(rows[static_cast<std::size_t>(j)]))
                                                                              .squaredNorm());
                }
            }
            BinarySvm machine = solve_binary(kernel, y, c);
            machine.positive = a;
            machine.negative = b;
            std::vector<double> kept;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (machine.coef[static_cast<std::size_t>(i)] != 0.0) {
                    machine.vectors.push_back(z.row(rows[static_cast<std::size_t>(i)]).transpose());
                    kept.push_back(machine.coef[static_cast<std::size_t>(i)]);
                }
            }
            machine.coef = std::move(kept);
            model->machines.push_back(std::move(machine));
        }
    }
    return model;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

} // namespace

std::string_view to_string(LearnerKind kind) { return learner_names.at(static_cast<std::size_t>(kind)); }

LearnerKind parse_learner(std::string_view name) {
    for (std::size_t i = 0; i < learner_names.size(); ++i) {
        if (learner_names[i] == name) {
            return all_learners[i];
        }
    }
    throw ConfigError("unknown learner '" + std::string(name) + "'");
}

int TrainedModel::predict(const Eigen::VectorXd& row) const {
    if (!model) {
        throw ConfigError("model has not been trained");
    }
    if (row.size() != model->dimension()) {
        throw ConfigError("feature dimension " + std::to_string(row.size()) + " does not match the model's " +
                          std::to_string(model->dimension()));
    }
    return model->predict(row);
}

std::vector<int> TrainedModel::predict_rows(const Eigen::MatrixXd& x) const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        out.push_back(predict(Eigen::VectorXd(x.row(i).transpose())));
    }
    return out;
}

std::vector<Hyperparameters> default_grid(LearnerKind kind, Eigen::Index p) {
    const double dim = static_cast<double>(std::max<Eigen::Index>(p, 1));
    std::vector<Hyperparameters> grid;
    switch (kind) {
    case LearnerKind::decision_tree:
        for (double depth : {2.0, 4.0, 8.0, 0.0}) {
            for (double leaf : {1.0, 3.0, 5.0}) {
                grid.push_back({{"max_depth", depth}, {"min_leaf", leaf}});
            }
        }
        break;
    case LearnerKind::random_forest:
        grid.push_back({{"trees", 100}, {"mtry", std::ceil(std::sqrt(dim))}, {"bootstrap", 1}, {"min_leaf", 1}});
        break;
    case LearnerKind::treebag:
        grid.push_back({{"trees", 50}, {"mtry", 0}, {"bootstrap", 1}, {"min_leaf", 1}});
        break;
    case LearnerKind::gbt:
        for (double depth : {1.0, 3.0}) {
            for (double shrink : {0.05, 0.1, 0.3}) {
                grid.push_back({{"max_depth", depth}, {"shrinkage", shrink}, {"rounds", 200}});
            }
        }
        break;
    case LearnerKind::mlp:
        for (double hidden : {8.0, 16.0, 32.0}) {
            grid.push_back({{"hidden", hidden}, {"epochs", 2000}, {"learning_rate", 0.1}, {"momentum", 0.9}, {"l2", 1e-4}});
        }
        break;
    case LearnerKind::svm:
        for (double c : {0.1, 1.0, 10.0}) {
            for (double g : {1.0, 2.0}) {
                grid.push_back({{"C", c}, {"gamma", g / dim}});
            }
        }
        break;
    }
    return grid;
}

std::shared_ptr<const Classifier> fit_classifier(LearnerKind kind, const Hyperparameters& hyper,
                                                 const Eigen::MatrixXd& x, std::span<const int> labels,
                                                 std::uint64_t seed) {
    if (static_cast<std::size_t>(x.rows()) != labels.size() || labels.empty()) {
        throw ConfigError("feature rows and labels must match and be non-empty");
    }
    const LabelCoding coding(labels);
    if (coding.k() == 1) {
        return std::make_shared<ConstantClassifier>(coding.classes.front(), x.cols());
    }
    switch (kind) {
    case LearnerKind::decision_tree: {
        Hyperparameters single = hyper;
        single["trees"] = 1;
        single["bootstrap"] = 0;
        single["mtry"] = 0;
        return fit_forest(single, x, coding, seed);
    }
    case LearnerKind::random_forest:
    case LearnerKind::treebag: return fit_forest(hyper, x, coding, seed);
    case LearnerKind::gbt: return fit_gbt(hyper, x, coding);
    case LearnerKind::mlp: return fit_mlp(hyper, x, coding, seed);
    case LearnerKind::svm: return fit_svm(hyper, x, coding);
    }
    throw ConfigError("unsupported learner");
}

TrainedModel train(LearnerKind kind, const MetaDataset& data, const CvSpec& cv,
                   const std::vector<Hyperparameters>& grid_in) {
    const auto n = static_cast<std::size_t>(data.x.rows());
    if (data.labels.size() != n || n == 0) {
        throw ConfigError("dataset rows and labels must match and be non-empty");
    }
    if (cv.folds < 2 || cv.repeats < 1) {
        throw ConfigError("cross-validation needs at least 2 folds and 1 repeat");
    }
    if (static_cast<std::size_t>(cv.folds) > n) {
        throw ConfigError("cannot use " + std::to_string(cv.folds) + " folds on " + std::to_string(n) + " rows");
    }
    TrainedModel out;
    out.learner = kind;
    const LabelCoding coding(data.labels);
    out.classes = coding.classes;
    if (coding.k() == 1) {
        spdlog::warn("{}: single-label training data, using a constant predictor", to_string(kind));
        out.cv_accuracy = 1.0;
        out.model = std::make_shared<ConstantClassifier>(coding.classes.front(), data.x.cols());
        return out;
    }
    const auto grid = grid_in.empty() ? default_grid(kind, data.x.cols()) : grid_in;
    if (grid.empty()) {
        throw ConfigError("hyperparameter grid is empty");
    }

    // fold assignment per repeat, shared by every grid point
    const auto folds = static_cast<std::size_t>(cv.folds);
    std::vector<std::vector<std::size_t>> permutations(static_cast<std::size_t>(cv.repeats));
    for (std::size_t r = 0; r < permutations.size(); ++r) {
        auto& perm = permutations[r];
        perm.resize(n);
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng(derive_seed(cv.seed, r));
        shuffle(std::span<std::size_t>(perm), rng);
    }
    const std::size_t per_grid = permutations.size() * folds;
    std::vector<double> accuracy(grid.size() * per_grid, 0.0);
    parallel_for(
        accuracy.size(),
        [&](std::size_t task) {
            const auto g = task / per_grid;
            const auto r = (task % per_grid) / folds;
            const auto f = task % folds;
            const auto& perm = permutations[r];
            const std::size_t lo = f * n / folds, hi = (f + 1) * n / folds;
            std::vector<std::size_t> train_rows, test_rows;
            for (std::size_t i = 0; i < n; ++i) {
                (i >= lo && i < hi ? test_rows : train_rows).push_back(perm[i]);
            }
            std::vector<int> train_labels;
            for (auto i : train_rows) {
                train_labels.push_back(data.labels[i]);
            }
            const auto model = fit_classifier(kind, grid[g], select_rows(data.x, train_rows), train_labels,
                                              derive_seed(cv.seed, 1000 + task % per_grid));
            std::size_t correct = 0;
            for (auto i : test_rows) {
                correct += model->predict(data.x.row(static_cast<Eigen::Index>(i)).transpose()) == data.labels[i];
            }
            accuracy[task] = static_cast<double>(correct) / static_cast<double>(test_rows.size());
        },
        cv.threads);

    std::size_t best = 0;
    double best_acc = -1.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double sum = 0.0;
        for (std::size_t t = 0; t < per_grid; ++t) {
            sum += accuracy[g * per_grid + t];
        }
        const double mean = sum / static_cast<double>(per_grid);
        if (mean > best_acc) {
            best_acc = mean;
            best = g;
        }
    }
    out.hyperparameters = grid[best];
    out.cv_accuracy = best_acc;
    out.model = fit_classifier(kind, grid[best], data.x, data.labels, derive_seed(cv.seed, 999999));
    return out;
}

ConfusionMatrix confusion_matrix(const TrainedModel& model, const MetaDataset& test) {
    const auto predicted = model.predict_rows(test.x);
    ConfusionMatrix cm;
    cm.labels = model.classes;
    cm.labels.insert(cm.labels.end(), test.labels.begin(), test.labels.end());
    std::sort(cm.labels.begin(), cm.labels.end());
    cm.labels.erase(std::unique(cm.labels.begin(), cm.labels.end()), cm.labels.end());
    cm.counts.assign(cm.labels.size(), std::vector<std::size_t>(cm.labels.size(), 0));
    auto pos = [&](int label) {
        return static_cast<std::size_t>(std::lower_bound(cm.labels.begin(), cm.labels.end(), label) - cm.labels.begin());
    };
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        ++cm.counts[pos(test.labels[i])][pos(predicted[i])];
    }
    return cm;
}

void write_confusion_csv(const std::filesystem::path& path, const ConfusionMatrix& cm,
                         const std::function<std::string(int)>& names) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << "actual";
    for (int l : cm.labels) {
        out << ',' << names(l);
    }
    out << '\n';
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        out << names(cm.labels[i]);
        for (auto c : cm.counts[i]) {
            out << ',' << c;
        }
        out << '\n';
    }
}

std::string model_metadata_json(const TrainedModel& model) {
    nlohmann::json j;
    j["learner"] = std::string(to_string(model.learner));
    j["hyperparameters"] = model.hyperparameters;
    j["cv_accuracy"] = model.cv_accuracy;
    j["classes"] = model.classes;
    return j.dump(2);
}

double mlp_loss_gradient(const Eigen::VectorXd& params, const Eigen::MatrixXd& x, std::span<const int> targets,
                         int hidden, int classes, double l2, Eigen::VectorXd* gradient) {
    const Eigen::Index p = x.cols();
    const Eigen::Index n = x.rows();
    const Eigen::Index n_w1 = hidden * p;
    const Eigen::Index n_w2 = static_cast<Eigen::Index>(classes) * hidden;
    if (params.size() != n_w1 + hidden + n_w2 + classes || static_cast<std::size_t>(n) != targets.size()) {
        throw ConfigError("MLP parameter or target size mismatch");
    }
    const Eigen::Map<const Eigen::MatrixXd> w1(params.data(), hidden, p);
    const auto b1 = params.segment(n_w1, hidden);
    const Eigen::Map<const Eigen::MatrixXd> w2(params.data() + n_w1 + hidden, classes, hidden);
    const auto b2 = params.segment(n_w1 + hidden + n_w2, classes);

    const Eigen::MatrixXd a = ((w1 * x.transpose()).colwise() + b1).array().tanh().matrix();  // hidden x n
    Eigen::MatrixXd out = (w2 * a).colwise() + b2;                                            // classes x n
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = out.col(i).maxCoeff();
        out.col(i) = (out.col(i).array() - m).exp().matrix();
        const double z = out.col(i).sum();
        out.col(i) /= z;
        loss -= std::log(std::max(out(targets[static_cast<std::size_t>(i)], i), 1e-300));
    }
    loss = loss / static_cast<double>(n) + 0.5 * l2 * (w1.squaredNorm() + w2.squaredNorm());
    if (gradient != nullptr) {
        Eigen::MatrixXd d_out = out;  // softmax minus one-hot, averaged
        for (Eigen::Index i = 0; i < n; ++i) {
            d_out(targets[static_cast<std::size_t>(i)], i) -= 1.0;
        }
        d_out /= static_cast<double>(n);
        const Eigen::MatrixXd d_hidden = ((w2.transpose() * d_out).array() * (1.0 - a.array().square())).matrix();
        gradient->resize(params.size());
        Eigen::Map<Eigen::MatrixXd>(gradient->data(), hidden, p) = d_hidden * x + l2 * w1;
        gradient->segment(n_w1, hidden) = d_hidden.rowwise().sum();
        Eigen::Map<Eigen::MatrixXd>(gradient->data() + n_w1 + hidden, classes, hidden) = d_out * a.transpose() + l2 * w2;
        gradient->segment(n_w1 + hidden + n_w2, classes) = d_out.rowwise().sum();
    }
    return loss;
}

} // namespace tsmeta
