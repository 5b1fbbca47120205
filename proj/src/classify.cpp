#include "keymix/classify.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "keymix/metrics.hpp"
#include "keymix/parallel.hpp"
#include "keymix/random.hpp"

namespace keymix {

namespace {

FeatureMatrix to_matrix(const std::vector<FeatureVector>& features,
                        std::span<const std::size_t> rows) {
    const std::size_t cols = features.empty() ? 0 : features.front().values.size();
    FeatureMatrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& v = features[rows[i]].values;
        if (v.size() != cols) throw std::invalid_argument("feature vectors differ in length");
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = v[j];
    }
    return m;
}

// Encodes users in order of first appearance.
std::vector<int> encode(const std::vector<std::string>& users, std::size_t& n_classes) {
    std::map<std::string, int> ids;
    std::vector<int> out;
    out.reserve(users.size());
    int next = 0;
    for (const auto& u : users) {
        auto [it, inserted] = ids.try_emplace(u, next);
        if (inserted) ++next;
        out.push_back(it->second);
    }
    n_classes = static_cast<std::size_t>(next);
    return out;
}

double majority_share(const std::vector<int>& labels) {
    std::map<int, std::size_t> counts;
    for (int l : labels) ++counts[l];
    std::size_t best = 0;
    for (const auto& [l, c] : counts) best = std::max(best, c);
    return labels.empty() ? 0.0 : static_cast<double>(best) / static_cast<double>(labels.size());
}

std::vector<std::string> users_of(const std::vector<Session>& sessions) {
    std::vector<std::string> users;
    users.reserve(sessions.size());
    for (const auto& s : sessions) users.push_back(s.user_id);
    return users;
}

}  // namespace

std::vector<FeatureVector> extract_all(const std::vector<Session>& sessions,
                                       const FeatureSpec& spec) {
    std::vector<FeatureVector> out(sessions.size());
    parallel_for(sessions.size(), [&](std::size_t i) { out[i] = extract_features(sessions[i], spec); });
    return out;
}

std::vector<std::size_t> stratified_folds(const std::vector<std::string>& users, std::size_t folds,
                                          std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("need at least two folds");
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::size_t>> by_user;
    for (std::size_t i = 0; i < users.size(); ++i) {
        auto [it, inserted] = by_user.try_emplace(users[i]);
        if (inserted) order.push_back(users[i]);
        it->second.push_back(i);
    }

    std::vector<std::size_t> fold(users.size());
    std::size_t next = 0;
    for (const auto& user : order) {
        auto idx = by_user[user];
        Rng rng(derive_seed(derive_seed(seed, "folds"), user));
        rng.shuffle(idx);
        for (std::size_t i : idx) fold[i] = next++ % folds;
    }
    return fold;
}

CvResult identity_cv(const std::vector<FeatureVector>& features,
                     const std::vector<std::string>& users, const ForestParams& params,
                     std::size_t max_folds) {
    if (features.size() != users.size())
        throw std::invalid_argument("identity_cv: features and labels differ in length");
    std::map<std::string, std::size_t> per_user;
    for (const auto& u : users) ++per_user[u];
    if (per_user.size() < 2) throw std::invalid_argument("identity_cv: need at least two users");
    std::size_t fewest = users.size();
    for (const auto& [u, c] : per_user) {
        if (c < 2)
            throw std::invalid_argument("identity_cv: user '" + u + "' has fewer than 2 sessions");
        fewest = std::min(fewest, c);
    }
    const std::size_t k = std::min(max_folds, fewest);

    std::size_t n_classes = 0;
    const auto labels = encode(users, n_classes);
    const auto fold = stratified_folds(users, k, params.seed);

    CvResult result;
    result.majority_baseline = majority_share(labels);
    result.fold_accuracy.resize(k);
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < users.size(); ++i) (fold[i] == f ? test : train).push_back(i);

        std::vector<int> y;
        y.reserve(train.size());
        for (std::size_t i : train) y.push_back(labels[i]);
        ForestParams fp = params;
        fp.seed = derive_seed(params.seed, static_cast<std::uint64_t>(f));
        const auto forest = RandomForest::train(to_matrix(features, train), y, fp);

        std::size_t correct = 0;
        for (std::size_t i : test)
            if (forest.predict(features[i].values) == labels[i]) ++correct;
        result.fold_accuracy[f] = static_cast<double>(correct) / static_cast<double>(test.size());
    }
    result.accuracy = std::accumulate(result.fold_accuracy.begin(), result.fold_accuracy.end(), 0.0) /
                      static_cast<double>(k);
    return result;
}

CvResult identity_cv(const std::vector<Session>& sessions, const FeatureSpec& spec,
                     const ForestParams& params, std::size_t max_folds) {
    return identity_cv(extract_all(sessions, spec), users_of(sessions), params, max_folds);
}

CvResult soft_trait_cv(const std::vector<FeatureVector>& features,
                       const std::vector<std::string>& users, const std::vector<int>& labels,
                       const ForestParams& params) {
    if (features.size() != users.size() || labels.size() != users.size())
        throw std::invalid_argument("soft_trait_cv: inputs differ in length");

    std::vector<std::string> order;
    std::map<std::string, int> user_label;
    for (std::size_t i = 0; i < users.size(); ++i) {
        auto [it, inserted] = user_label.try_emplace(users[i], labels[i]);
        if (inserted) order.push_back(users[i]);
        else if (it->second != labels[i])
            throw std::invalid_argument("soft_trait_cv: user '" + users[i] +
                                        "' has inconsistent trait labels");
    }
    std::map<int, std::size_t> users_per_class;
    for (const auto& [u, l] : user_label) ++users_per_class[l];
    if (users_per_class.size() < 2)
        throw std::invalid_argument("soft_trait_cv: need at least two trait classes");
    for (const auto& [l, c] : users_per_class)
        if (c < 2)
            throw std::invalid_argument("soft_trait_cv: trait class " + std::to_string(l) +
                                        " has fewer than 2 users");

    CvResult result;
    result.majority_baseline = majority_share(labels);
    result.fold_accuracy.resize(order.size());
    std::size_t correct_total = 0;
    for (std::size_t f = 0; f < order.size(); ++f) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < users.size(); ++i)
            (users[i] == order[f] ? test : train).push_back(i);

        std::vector<int> y;
        y.reserve(train.size());
        for (std::size_t i : train) y.push_back(labels[i]);
        ForestParams fp = params;
        fp.seed = derive_seed(params.seed, static_cast<std::uint64_t>(f));
        const auto forest = RandomForest::train(to_matrix(features, train), y, fp);

        std::size_t correct = 0;
        for (std::size_t i : test)
            if (forest.predict(features[i].values) == labels[i]) ++correct;
        correct_total += correct;
        result.fold_accuracy[f] = static_cast<double>(correct) / static_cast<double>(test.size());
    }
    result.accuracy = static_cast<double>(correct_total) / static_cast<double>(users.size());
    return result;
}

CvResult soft_trait_cv(const std::vector<Session>& sessions, Trait trait, const FeatureSpec& spec,
                       const ForestParams& params) {
    std::vector<int> labels;
    labels.reserve(sessions.size());
    for (const auto& s : sessions) {
        const auto c = trait_class(s.labels, trait);
        if (!c)
            throw std::invalid_argument("soft_trait_cv: user '" + s.user_id + "' has no " +
                                        std::string(to_string(trait)) + " label");
        labels.push_back(*c);
    }
    return soft_trait_cv(extract_all(sessions, spec), users_of(sessions), labels, params);
}

IntervalPredictionError predict_intervals(const Session& session) {
    const auto paired = pair_keystrokes(session);
    if (paired.keystrokes.size() < 3)
        throw std::invalid_argument("predict_intervals needs at least 3 keystrokes, session " +
                                    session.user_id + "/" + session.session_id + " has " +
                                    std::to_string(paired.keystrokes.size()));

    auto running_mean_error = [](const std::vector<double>& values) {
        std::vector<double> predicted, actual;
        predicted.reserve(values.size());
        actual.reserve(values.size());
        double sum = values.front();
        for (std::size_t n = 1; n < values.size(); ++n) {
            predicted.push_back(sum / static_cast<double>(n));
            actual.push_back(values[n]);
            sum += values[n];
        }
        return metrics::smape(predicted, actual);
    };

    return {running_mean_error(paired.press_latencies()), running_mean_error(paired.durations())};
}

IntervalPredictionError predict_intervals(const std::vector<Session>& sessions) {
    if (sessions.empty()) throw std::invalid_argument("predict_intervals: no sessions");
    std::vector<IntervalPredictionError> per(sessions.size());
    parallel_for(sessions.size(), [&](std::size_t i) { per[i] = predict_intervals(sessions[i]); });
    IntervalPredictionError mean;
    for (const auto& e : per) {
        mean.smape_pp += e.smape_pp;
        mean.smape_du += e.smape_du;
    }
    mean.smape_pp /= static_cast<double>(per.size());
    mean.smape_du /= static_cast<double>(per.size());
    return mean;
}

}  // namespace keymix
