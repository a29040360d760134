#pragma once

#include "tsmeta/random.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace tsmeta::detail {

struct TreeOptions {
    int max_depth = 0;  // 0: unlimited
    int min_leaf = 1;
    int mtry = 0;       // features tried per split; 0: all
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // class index for classification trees
};

/// Binary tree over presorted rows. Goes left when x[feature] <= threshold.
class Tree {
public:
    /// Gini CART on class indices 0..classes-1. `rows` may repeat (bootstrap).
    void fit_classification(const Eigen::MatrixXd& x, std::span<const int> target, int classes,
                            std::span<const std::size_t> rows, const TreeOptions& options, Rng* rng);

    /// Least-squares split search on `residual`; leaf value is
    /// scale * sum(residual) / sum(hessian).
    void fit_regression(const Eigen::MatrixXd& x, std::span<const double> residual,
                        std::span<const double> hessian, double scale, std::span<const std::size_t> rows,
                        const TreeOptions& options);

    double predict(const Eigen::VectorXd& row) const;
    std::size_t size() const { return nodes_.size(); }

private:
    std::vector<TreeNode> nodes_;
};

} // namespace tsmeta::detail
