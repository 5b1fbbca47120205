#include <cmath>
#include <numeric>

#include <stdexcept>

#include "doctest.h"
#include "keymix/forest.hpp"
#include "keymix/random.hpp"

using namespace keymix;

namespace {

double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
    return static_cast<double>(hit) / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("feature matrix") {
    const auto m = FeatureMatrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    CHECK(m.rows() == 3);
    CHECK(m.cols() == 2);
    CHECK(m(2, 1) == 6);
    const std::vector<std::size_t> pick{2, 0};
    const auto s = m.select(pick);
    CHECK(s(0, 0) == 5);
    CHECK(s(1, 1) == 2);
    CHECK_THROWS_AS(FeatureMatrix::from_rows({{1, 2}, {3}}), std::invalid_argument);
}

TEST_CASE("separable classes are learned exactly") {
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        rows.push_back({i < 20 ? 0.0 : 1.0});
        y.push_back(i < 20 ? 0 : 1);
    }
    const auto x = FeatureMatrix::from_rows(rows);
    ForestParams params;
    params.n_trees = 50;
    params.seed = 1;
    const auto forest = RandomForest::train(x, y, params);
    CHECK(accuracy(forest.predict(x), y) == 1.0);
    CHECK(forest.n_classes() == 2);
    CHECK(forest.n_trees() == 50);
    const auto p = forest.predict_proba(x.row(0));
    CHECK(p[0] + p[1] == doctest::Approx(1.0));
    CHECK(p[0] > 0.9);
}

TEST_CASE("multiclass with noise features") {
    Rng rng(4);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < 300; ++i) {
        const int c = i % 3;
        rows.push_back({c * 2.0 + rng.normal(0, 0.3), rng.normal(), rng.normal(), rng.normal()});
        y.push_back(c);
    }
    const auto x = FeatureMatrix::from_rows(rows);
    ForestParams params;
    params.n_trees = 60;
    params.seed = 2;
    const auto forest = RandomForest::train(x, y, params);
    std::vector<std::vector<double>> test_rows;
    std::vector<int> test_y;
    for (int i = 0; i < 300; ++i) {
        const int c = i % 3;
        test_rows.push_back({c * 2.0 + rng.normal(0, 0.3), rng.normal(), rng.normal(), rng.normal()});
        test_y.push_back(c);
    }
    CHECK(accuracy(forest.predict(FeatureMatrix::from_rows(test_rows)), test_y) > 0.95);
}

TEST_CASE("shuffled labels give chance accuracy on held-out data") {
    Rng rng(8);
    auto make = [&](std::size_t n) {
        std::vector<std::vector<double>> rows;
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            rows.push_back({rng.normal(), rng.normal(), rng.normal(), rng.normal()});
            y[i] = static_cast<int>(i % 2);
        }
        rng.shuffle(y);
        return std::pair{FeatureMatrix::from_rows(rows), y};
    };
    const auto [xtr, ytr] = make(400);
    const auto [xte, yte] = make(400);
    ForestParams params;
    params.n_trees = 100;
    params.seed = 3;
    const auto forest = RandomForest::train(xtr, ytr, params);
    CHECK(accuracy(forest.predict(xte), yte) == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("training is deterministic in the seed") {
    Rng rng(12);
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < 100; ++i) {
        rows.push_back({rng.normal(), rng.normal()});
        y.push_back(i % 4);
    }
    const auto x = FeatureMatrix::from_rows(rows);
    ForestParams params;
    params.n_trees = 30;
    params.seed = 9;
    const auto a = RandomForest::train(x, y, params).predict(x);
    const auto b = RandomForest::train(x, y, params).predict(x);
    CHECK(a == b);
}

TEST_CASE("depth limit") {
    std::vector<std::vector<double>> rows;
    std::vector<int> y;
    for (int i = 0; i < 64; ++i) {
        rows.push_back({static_cast<double>(i)});
        y.push_back(i % 2);
    }
    const auto x = FeatureMatrix::from_rows(rows);
    std::vector<std::size_t> sample(64);
    std::iota(sample.begin(), sample.end(), std::size_t{0});
    ForestParams params;
    params.max_depth = 2;
    params.bootstrap = false;
    DecisionTree tree;
    tree.fit(x, y, 2, sample, params, 1);
    CHECK(tree.depth() <= 2);
    CHECK(tree.node_count() <= 7);
}

TEST_CASE("training preconditions") {
    const auto x = FeatureMatrix::from_rows({{1}, {2}, {3}});
    ForestParams params;
    CHECK_THROWS_AS(RandomForest::train(x, std::vector<int>{0, 0, 0}, params), std::invalid_argument);
    CHECK_THROWS_AS(RandomForest::train(x, std::vector<int>{0, 1}, params), std::invalid_argument);
    CHECK_THROWS_AS(RandomForest::train(x, std::vector<int>{0, -1, 1}, params), std::invalid_argument);
    params.n_trees = 0;
    CHECK_THROWS_AS(RandomForest::train(x, std::vector<int>{0, 1, 1}, params), std::invalid_argument);
    const auto bad = FeatureMatrix::from_rows({{1}, {NAN}, {3}});
    CHECK_THROWS_AS(RandomForest::train(bad, std::vector<int>{0, 1, 1}, ForestParams{}),
                    std::invalid_argument);
}
