#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace keymix {

/// Dense row-major matrix of feature vectors.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    /// Copy of the selected rows, in the given order.
    FeatureMatrix select(std::span<const std::size_t> rows) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct ForestParams {
    std::size_t n_trees = 200;
    std::size_t max_depth = 0;           // 0 = grow until leaves are pure
    std::size_t features_per_split = 0;  // 0 = ceil(sqrt(d))
    std::size_t min_samples_split = 2;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

/// CART classification tree grown on Gini impurity.
class DecisionTree {
public:
    struct Node {
        // Internal node: feature/threshold/children. Leaf: left == 0.
        std::size_t feature = 0;
        double threshold = 0.0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
        int label = -1;
    };

    void fit(const FeatureMatrix& x, std::span<const int> y, std::size_t n_classes,
             std::span<const std::size_t> sample, const ForestParams& params, std::uint64_t seed);

    int predict(std::span<const double> row) const;
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t depth() const noexcept { return depth_; }

private:
    std::vector<Node> nodes_;
    std::size_t depth_ = 0;
};

/// Bagged ensemble of CART trees with a random feature subset per split.
///
/// Every tree is seeded from (params.seed, tree index), so a trained forest
/// does not depend on how many threads grew it.
class RandomForest {
public:
    /// Labels are class indices in [0, n_classes). Requires at least two
    /// classes present and two samples of each; throws std::invalid_argument
    /// otherwise.
    static RandomForest train(const FeatureMatrix& x, std::span<const int> y,
                              const ForestParams& params);

    int predict(std::span<const double> row) const;
    /// Fraction of trees voting for each class.
    std::vector<double> predict_proba(std::span<const double> row) const;
    std::vector<int> predict(const FeatureMatrix& x) const;

    std::size_t n_classes() const noexcept { return n_classes_; }
    std::size_t n_trees() const noexcept { return trees_.size(); }

private:
    std::vector<DecisionTree> trees_;
    std::size_t n_classes_ = 0;
    // Class precedence for breaking vote ties; a seeded permutation.
    std::vector<std::size_t> tie_rank_;
};

}  // namespace keymix
