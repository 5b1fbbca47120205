#include "keymix/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "keymix/parallel.hpp"
#include "keymix/random.hpp"

namespace keymix {

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    FeatureMatrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols_)
            throw std::invalid_argument("feature rows have different lengths");
        std::copy(rows[r].begin(), rows[r].end(), m.data_.begin() + r * m.cols_);
    }
    return m;
}

FeatureMatrix FeatureMatrix::select(std::span<const std::size_t> rows) const {
    FeatureMatrix m(rows.size(), cols_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = row(rows[i]);
        std::copy(src.begin(), src.end(), m.data_.begin() + i * cols_);
    }
    return m;
}

namespace {

struct SplitCandidate {
    double score = -1.0;  // sum over children of (sum_c count_c^2) / n_child
    std::size_t feature = 0;
    double threshold = 0.0;
    std::size_t left_size = 0;
};

int majority(const std::vector<double>& counts) {
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace

void DecisionTree::fit(const FeatureMatrix& x, std::span<const int> y, std::size_t n_classes,
                       std::span<const std::size_t> sample, const ForestParams& params,
                       std::uint64_t seed) {
    nodes_.clear();
    depth_ = 0;
    Rng rng(seed);

    const std::size_t d = x.cols();
    std::size_t mtry = params.features_per_split;
    if (mtry == 0) mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    mtry = std::clamp<std::size_t>(mtry, 1, std::max<std::size_t>(d, 1));

    struct Work {
        std::uint32_t node;
        std::size_t begin, end, depth;
    };
    std::vector<std::size_t> idx(sample.begin(), sample.end());
    std::vector<Work> stack;
    nodes_.push_back({});
    stack.push_back({0, 0, idx.size(), 0});

    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), std::size_t{0});
    std::vector<std::pair<double, int>> column;
    std::vector<double> counts(n_classes), left(n_classes);

    while (!stack.empty()) {
        const Work w = stack.back();
        stack.pop_back();
        depth_ = std::max(depth_, w.depth);
        const std::size_t n = w.end - w.begin;

        std::fill(counts.begin(), counts.end(), 0.0);
        for (std::size_t i = w.begin; i < w.end; ++i) counts[y[idx[i]]] += 1.0;
        const int label = majority(counts);
        nodes_[w.node].label = label;

        const bool pure = counts[label] == static_cast<double>(n);
        if (pure || n < params.min_samples_split ||
            (params.max_depth != 0 && w.depth >= params.max_depth))
            continue;

        // Visit features in random order until mtry non-constant ones have
        // been evaluated.
        rng.shuffle(features);
        SplitCandidate best;
        std::size_t evaluated = 0;
        for (std::size_t f : features) {
            if (evaluated >= mtry) break;
            column.clear();
            for (std::size_t i = w.begin; i < w.end; ++i)
                column.emplace_back(x(idx[i], f), y[idx[i]]);
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;
            ++evaluated;

            std::fill(left.begin(), left.end(), 0.0);
            double left_sq = 0.0;
            double right_sq = 0.0;
            for (double c : counts) right_sq += c * c;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const int c = column[i].second;
                const double right_c = counts[c] - left[c];
                left_sq += 2.0 * left[c] + 1.0;
                right_sq -= 2.0 * right_c - 1.0;
                left[c] += 1.0;
                if (column[i].first == column[i + 1].first) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = static_cast<double>(n - i - 1);
                const double score = left_sq / nl + right_sq / nr;
                if (score > best.score) {
                    best.score = score;
                    best.feature = f;
                    double t = 0.5 * (column[i].first + column[i + 1].first);
                    if (t >= column[i + 1].first) t = column[i].first;
                    best.threshold = t;
                    best.left_size = i + 1;
                }
            }
        }
        if (best.score < 0.0) continue;

        auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(w.begin),
                                  idx.begin() + static_cast<std::ptrdiff_t>(w.end),
                                  [&](std::size_t s) { return x(s, best.feature) <= best.threshold; });
        const std::size_t split = static_cast<std::size_t>(mid - idx.begin());

        const auto left_id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({});
        const auto right_id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back({});
        Node& node = nodes_[w.node];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left_id;
        node.right = right_id;
        stack.push_back({right_id, split, w.end, w.depth + 1});
        stack.push_back({left_id, w.begin, split, w.depth + 1});
    }
}

int DecisionTree::predict(std::span<const double> row) const {
    std::uint32_t i = 0;
    while (nodes_[i].left != 0) {
        const Node& n = nodes_[i];
        i = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes_[i].label;
}

RandomForest RandomForest::train(const FeatureMatrix& x, std::span<const int> y,
                                 const ForestParams& params) {
    if (params.n_trees < 1) throw std::invalid_argument("forest needs at least one tree");
    if (x.rows() != y.size())
        throw std::invalid_argument("feature matrix has " + std::to_string(x.rows()) +
                                    " rows but " + std::to_string(y.size()) + " labels");
    if (x.rows() < 2 || x.cols() == 0)
        throw std::invalid_argument("forest needs at least two samples and one feature");
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (double v : x.row(r))
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");

    int max_label = -1;
    for (int label : y) {
        if (label < 0) throw std::invalid_argument("class labels must be non-negative");
        max_label = std::max(max_label, label);
    }
    const auto n_classes = static_cast<std::size_t>(max_label) + 1;
    std::vector<std::size_t> class_count(n_classes, 0);
    for (int label : y) ++class_count[static_cast<std::size_t>(label)];
    const auto present = std::count_if(class_count.begin(), class_count.end(),
                                       [](std::size_t c) { return c > 0; });
    if (present < 2) throw std::invalid_argument("forest needs at least two classes");

    RandomForest forest;
    forest.n_classes_ = n_classes;
    forest.tie_rank_.resize(n_classes);
    {
        std::vector<std::size_t> order(n_classes);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(params.seed, hash_string("vote-ties")));
        rng.shuffle(order);
        for (std::size_t pos = 0; pos < n_classes; ++pos) forest.tie_rank_[order[pos]] = pos;
    }

    forest.trees_.resize(params.n_trees);
    const std::size_t n = x.rows();
    parallel_for(params.n_trees, [&](std::size_t t) {
        const std::uint64_t tree_seed = derive_seed(params.seed, static_cast<std::uint64_t>(t));
        std::vector<std::size_t> sample(n);
        if (params.bootstrap) {
            Rng rng(derive_seed(tree_seed, hash_string("bootstrap")));
            for (auto& s : sample) s = rng.index(n);
        } else {
            std::iota(sample.begin(), sample.end(), std::size_t{0});
        }
        forest.trees_[t].fit(x, y, n_classes, sample, params, tree_seed);
    });
    return forest;
}

std::vector<double> RandomForest::predict_proba(std::span<const double> row) const {
    std::vector<double> votes(n_classes_, 0.0);
    for (const auto& tree : trees_) votes[static_cast<std::size_t>(tree.predict(row))] += 1.0;
    for (auto& v : votes) v /= static_cast<double>(trees_.size());
    return votes;
}

int RandomForest::predict(std::span<const double> row) const {
    const auto votes = predict_proba(row);
    std::size_t best = 0;
    for (std::size_t c = 1; c < n_classes_; ++c) {
        if (votes[c] > votes[best] || (votes[c] == votes[best] && tie_rank_[c] < tie_rank_[best]))
            best = c;
    }
    return static_cast<int>(best);
}

std::vector<int> RandomForest::predict(const FeatureMatrix& x) const {
    std::vector<int> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.row(r));
    return out;
}

}  // namespace keymix
