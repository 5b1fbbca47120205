#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "keymix/events.hpp"

namespace keymix {

/// A node in the key-group hierarchy. Group 0 is the root ("all keys") and
/// contains every keystroke; each other group names its parent, which must
/// come earlier in the list.
struct KeyGroup {
    std::string name;
    std::optional<std::size_t> parent;  // nullopt only for the root
    std::set<std::string> keys;         // ignored for the root
    bool catch_all = false;             // receives keys claimed by no sibling
};

enum class Measure { Duration = 0, PressLatency = 1 };
enum class Statistic { Mean = 0, StdDev = 1 };

struct FeatureSpec {
    std::vector<KeyGroup> groups;
    std::size_t min_observations = 5;
    double latency_clip = 5000.0;  // ms; longer press-press pauses are truncated

    /// all keys -> {space, ten most frequent English letters, other}.
    static FeatureSpec standard();

    std::size_t size() const noexcept { return groups.size() * 4; }
    static std::size_t index(std::size_t group, Measure m, Statistic s) noexcept {
        return group * 4 + static_cast<std::size_t>(m) * 2 + static_cast<std::size_t>(s);
    }
    std::string feature_name(std::size_t i) const;

    /// Throws std::invalid_argument unless the groups form a tree rooted at
    /// group 0 and min_observations >= 1.
    void validate() const;
};

struct FeatureVector {
    std::vector<double> values;
    // Index of the group whose observations supplied each value.
    std::vector<std::size_t> source_group;

    bool is_fallback(std::size_t feature) const { return source_group[feature] != feature / 4; }
};

/// Lower-cased key symbol as seen by the grouping (" " and "space" are the
/// same key).
std::string normalize_key(const std::string& key);

/// Mean and standard deviation of durations and press-press latencies per key
/// group. Groups with fewer than min_observations values inherit the
/// statistics of their nearest ancestor that has enough, falling back to the
/// root. Throws std::invalid_argument for sessions with fewer than two
/// keystrokes.
FeatureVector extract_features(const Session& session, const FeatureSpec& spec);

/// Feature matrix as CSV: `user,session_id,f0,...,f{n-1}`.
std::string write_features_csv(const std::vector<Session>& sessions,
                               const std::vector<FeatureVector>& features);

}  // namespace keymix
