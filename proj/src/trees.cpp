#include "trees.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace tsmeta::detail {

namespace {

using SortedRows = std::vector<std::vector<std::size_t>>;

struct Builder {
    const Eigen::MatrixXd& x;
    const TreeOptions& options;
    Rng* rng = nullptr;
    bool classification = true;
    std::span<const int> target;
    int classes = 0;
    std::span<const double> residual;
    std::span<const double> hessian;
    double scale = 1.0;
    std::vector<TreeNode>& nodes;
    std::vector<char> goes_left;

    std::vector<int> candidate_features() {
        const auto p = static_cast<int>(x.cols());
        std::vector<int> all(static_cast<std::size_t>(p));
        std::iota(all.begin(), all.end(), 0);
        if (options.mtry <= 0 || options.mtry >= p || rng == nullptr) {
            return all;
        }
        for (int i = 0; i < options.mtry; ++i) {
            const auto j = i + static_cast<int>(uniform_below(*rng, static_cast<std::uint64_t>(p - i)));
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
        }
        all.resize(static_cast<std::size_t>(options.mtry));
        std::sort(all.begin(), all.end());
        return all;
    }

    double leaf_value(const std::vector<std::size_t>& rows) const {
        if (classification) {
            std::vector<std::size_t> counts(static_cast<std::size_t>(classes), 0);
            for (auto r : rows) {
                ++counts[static_cast<std::size_t>(target[r])];
            }
            return static_cast<double>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        }
        double num = 0.0, den = 0.0;
        for (auto r : rows) {
            num += residual[r];
            den += hessian[r];
        }
        return scale * num / std::max(den, 1e-12);
    }

    int build(SortedRows sorted, int depth) {
        const auto& rows = sorted.front();
        const std::size_t n = rows.size();
        const auto index = static_cast<int>(nodes.size());
        nodes.push_back({});
        nodes[static_cast<std::size_t>(index)].value = leaf_value(rows);

        const auto min_leaf = static_cast<std::size_t>(std::max(options.min_leaf, 1));
        if (n < 2 * min_leaf || (options.max_depth > 0 && depth >= options.max_depth)) {
            return index;
        }

        // node totals
        std::vector<double> total(classification ? static_cast<std::size_t>(classes) : 1, 0.0);
        for (auto r : rows) {
            if (classification) {
                total[static_cast<std::size_t>(target[r])] += 1.0;
            } else {
                total[0] += residual[r];
            }
        }
        double parent_score = 0.0;
        if (classification) {
            const auto nonzero = std::count_if(total.begin(), total.end(), [](double c) { return c > 0.0; });
            if (nonzero <= 1) {
                return index;  // pure
            }
        } else {
            parent_score = total[0] * total[0] / static_cast<double>(n);
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_score = -std::numeric_limits<double>::infinity();
        std::vector<double> left(total.size());
        for (int f : candidate_features()) {
            const auto& order = sorted[static_cast<std::size_t>(f)];
            std::fill(left.begin(), left.end(), 0.0);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const auto r = order[i];
                if (classification) {
                    left[static_cast<std::size_t>(target[r])] += 1.0;
                } else {
                    left[0] += residual[r];
                }
                const double lo = x(static_cast<Eigen::Index>(r), f);
                const double hi = x(static_cast<Eigen::Index>(order[i + 1]), f);
                const std::size_t n_left = i + 1;
                if (!(hi > lo) || n_left < min_leaf || n - n_left < min_leaf) {
                    continue;
                }
                double score = 0.0;
                const auto nl = static_cast<double>(n_left);
                const auto nr = static_cast<double>(n - n_left);
                for (std::size_t k = 0; k < total.size(); ++k) {
                    const double right = total[k] - left[k];
                    score += left[k] * left[k] / nl + right * right / nr;
                }
                if (score > best_score) {
                    best_score = score;
                    best_feature = f;
                    const double mid = lo + (hi - lo) / 2.0;
                    best_threshold = mid < hi ? mid : lo;
                }
            }
        }
        if (best_feature < 0) {
            return index;
        }
        if (!classification && !(best_score > parent_score + 1e-12 * std::abs(parent_score) + 1e-300)) {
            return index;
        }

        for (auto r : rows) {
            goes_left[r] = x(static_cast<Eigen::Index>(r), best_feature) <= best_threshold ? 1 : 0;
        }
        SortedRows left_rows(sorted.size()), right_rows(sorted.size());
        for (std::size_t f = 0; f < sorted.size(); ++f) {
            for (auto r : sorted[f]) {
                (goes_left[r] ? left_rows[f] : right_rows[f]).push_back(r);
            }
        }
        sorted.clear();
        sorted.shrink_to_fit();
        const int l = build(std::move(left_rows), depth + 1);
        const int rgt = build(std::move(right_rows), depth + 1);
        auto& node = nodes[static_cast<std::size_t>(index)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = rgt;
        return index;
    }

    int run(std::span<const std::size_t> rows) {
        SortedRows sorted(static_cast<std::size_t>(x.cols()));
        for (Eigen::Index f = 0; f < x.cols(); ++f) {
            auto& order = sorted[static_cast<std::size_t>(f)];
            order.assign(rows.begin(), rows.end());
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f);
            });
        }
        goes_left.assign(static_cast<std::size_t>(x.rows()), 0);
        return build(std::move(sorted), 0);
    }
};

} // namespace

void Tree::fit_classification(const Eigen::MatrixXd& x, std::span<const int> target, int classes,
                              std::span<const std::size_t> rows, const TreeOptions& options, Rng* rng) {
    nodes_.clear();
    Builder b{x, options, rng, true, target, classes, {}, {}, 1.0, nodes_, {}};
    b.run(rows);
}

void Tree::fit_regression(const Eigen::MatrixXd& x, std::span<const double> residual,
                          std::span<const double> hessian, double scale, std::span<const std::size_t> rows,
                          const TreeOptions& options) {
    nodes_.clear();
    Builder b{x, options, nullptr, false, {}, 0, residual, hessian, scale, nodes_, {}};
    b.run(rows);
}

double Tree::predict(const Eigen::VectorXd& row) const {
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        const auto& node = nodes_[i];
        i = static_cast<std::size_t>(row(node.feature) <= node.threshold ? node.left : node.right);
    }
    return nodes_[i].value;
}

} // namespace tsmeta::detail
