#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "keymix/events.hpp"

namespace keymix::synth {

// Population medians for generated typists. These are plumbing constants:
// tests depend on relative separability between users, not on these values.
inline constexpr double kMedianPressLatency = 200.0;  // ms
inline constexpr double kMedianDuration = 90.0;       // ms

/// Symbols generated text is drawn from: 'a'..'z' then space.
inline constexpr std::size_t kSymbols = 27;

/// Lognormal timing model of one typist.
struct UserProfile {
    std::string user_id;
    double pp_log_mean = 0.0;
    double pp_log_sd = 0.5;
    double du_log_mean = 0.0;
    double du_log_sd = 0.12;
    // Per-symbol shifts of the log means.
    std::array<double, kSymbols> pp_key_shift{};
    std::array<double, kSymbols> du_key_shift{};
    TraitLabels traits;
    std::uint64_t seed = 0;
};

struct FixedLength {
    std::size_t chars = 20;
};

/// Normal length model, resampled until at least `min_chars`.
struct NormalLength {
    double mean = 123.0;
    double sd = 38.0;
    std::size_t min_chars = 20;
};

using LengthModel = std::variant<FixedLength, NormalLength>;

struct CohortParams {
    std::size_t n_users = 10;
    std::size_t sessions_per_user = 10;
    LengthModel length = FixedLength{};
    // Scale of between-user variation; 0 makes every user identical.
    double dispersion = 1.0;
    // Log-scale shift tying behavior to traits: over-30 users have longer
    // press latencies, male users longer holds, left-handed users more
    // variable latencies. 0 keeps traits independent of behavior.
    double trait_effect = 0.0;
    std::uint64_t seed = 0;
};

/// The standard desk-scale cohort: 10 users x 10 sessions of 20 characters.
CohortParams standard_cohort(std::uint64_t seed = 1);

void validate(const CohortParams& params);

/// Profiles for every user. Trait classes are dealt by quota (age 51% over
/// 30, 68% male, 88% right-handed) with at least two users in each class
/// whenever there are four or more users.
std::vector<UserProfile> generate_profiles(const CohortParams& params);

/// One typing sample of `chars` characters for the profile.
Session generate_session(const UserProfile& profile, const std::string& session_id,
                         std::size_t chars, std::uint64_t seed);

/// Sessions for every user, grouped by user. Deterministic in params.seed.
std::vector<Session> generate_cohort(const CohortParams& params);

/// Events at Poisson times with the given rate (events per ms), alternating
/// press and release of the same key so every press is matched. Times are
/// quantized to whole milliseconds. Throws std::invalid_argument for rate <= 0.
Session generate_poisson_stream(double rate, std::size_t n_events, std::uint64_t seed,
                                const std::string& user_id = "poisson");

}  // namespace keymix::synth
