#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "keymix/events.hpp"
#include "keymix/features.hpp"
#include "keymix/forest.hpp"

namespace keymix {

struct CvResult {
    double accuracy = 0.0;
    std::vector<double> fold_accuracy;
    // Proportion of the largest class among all evaluated samples.
    double majority_baseline = 0.0;
};

/// Features for every session, extracted in parallel.
std::vector<FeatureVector> extract_all(const std::vector<Session>& sessions,
                                       const FeatureSpec& spec);

/// Fold index for every session: each user's sessions are shuffled with a
/// seeded generator and dealt round-robin over `folds` folds.
std::vector<std::size_t> stratified_folds(const std::vector<std::string>& users, std::size_t folds,
                                          std::uint64_t seed);

/// Identification attack: stratified k-fold cross-validation over users,
/// k = min(max_folds, fewest sessions of any user). Returns the mean fold
/// accuracy. Throws std::invalid_argument if any user has fewer than two
/// sessions or there are fewer than two users.
CvResult identity_cv(const std::vector<Session>& sessions, const FeatureSpec& spec,
                     const ForestParams& params, std::size_t max_folds = 10);
CvResult identity_cv(const std::vector<FeatureVector>& features,
                     const std::vector<std::string>& users, const ForestParams& params,
                     std::size_t max_folds = 10);

/// Soft-trait attack: leave-one-user-out cross-validation. Every session must
/// carry the trait and each class must have at least two users. Class sizes in
/// the training folds are left as they are. Returns the pooled accuracy.
CvResult soft_trait_cv(const std::vector<Session>& sessions, Trait trait, const FeatureSpec& spec,
                       const ForestParams& params);
CvResult soft_trait_cv(const std::vector<FeatureVector>& features,
                       const std::vector<std::string>& users, const std::vector<int>& labels,
                       const ForestParams& params);

struct IntervalPredictionError {
    double smape_pp = 0.0;
    double smape_du = 0.0;
};

/// Predicts each press-press latency and duration from the running mean of
/// the earlier ones and scores the predictions with SMAPE. Requires at least
/// three keystrokes.
IntervalPredictionError predict_intervals(const Session& session);

/// Mean of the per-session errors.
IntervalPredictionError predict_intervals(const std::vector<Session>& sessions);

}  // namespace keymix
