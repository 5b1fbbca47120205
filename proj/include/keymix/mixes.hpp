#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "keymix/events.hpp"
#include "keymix/random.hpp"

namespace keymix {

/// A scripted draw fell outside the bounds requested by the mix, or a
/// script ran out of values.
class NoiseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Source of the mix's randomness: either a seeded generator or a fixed list
/// of values replayed in order (for worked examples and golden traces).
class NoiseSource {
public:
    static NoiseSource seeded(std::uint64_t seed);
    static NoiseSource scripted(std::vector<double> values);

    /// Next value in the closed interval [lo, hi].
    double draw(double lo, double hi);

    bool is_scripted() const noexcept { return std::holds_alternative<Script>(impl_); }

private:
    struct Script {
        std::vector<double> values;
        std::size_t next = 0;
    };
    explicit NoiseSource(std::variant<Rng, Script> impl) : impl_(std::move(impl)) {}

    std::variant<Rng, Script> impl_;
};

// ---------------------------------------------------------------------------
// Delay mix: each event is held for a uniform random delay in [l, max_delay],
// where the lower bound l keeps arrival order equal to generation order.

struct DelayMixParams {
    double max_delay = 0.0;  // ms, >= 0
};

struct DelayMixState {
    double prev_delay = 0.0;
    std::optional<double> prev_arrival;
    std::optional<double> prev_gen_time;
};

struct DelayStep {
    double arrival = 0.0;
    double lower_bound = 0.0;
    double delay = 0.0;
};

/// Advances the delay mix by one event. Throws std::invalid_argument if
/// gen_time precedes the previous event.
DelayStep delay_mix_step(DelayMixState& state, const DelayMixParams& params, double gen_time,
                         NoiseSource& noise);

// ---------------------------------------------------------------------------
// Interval mix: draws the desired inter-arrival interval directly from
// [0, u] and adapts u toward the user's rate with gain b and floor epsilon.

struct IntervalMixParams {
    double gain = 1.0;        // b, >= 0
    double epsilon = 1.0;     // ms, > 0
    double initial_bound = 100.0;  // u for the first drawn interval, > 0
};

struct IntervalMixState {
    double bound = 0.0;  // u for the next draw
    std::optional<double> prev_arrival;
    std::optional<double> prev_gen_time;

    static IntervalMixState initial(const IntervalMixParams& params);
};

struct IntervalStep {
    double arrival = 0.0;
    double delay = 0.0;
    // Unset for the first event, which passes through without a draw.
    std::optional<double> bound_used;
    std::optional<double> desired_interval;
    std::optional<double> desired_time;
};

IntervalStep interval_mix_step(IntervalMixState& state, const IntervalMixParams& params,
                               double gen_time, NoiseSource& noise);

// ---------------------------------------------------------------------------

using MixSpec = std::variant<DelayMixParams, IntervalMixParams>;

void validate(const DelayMixParams& params);
void validate(const IntervalMixParams& params);

struct MixedSession {
    Session session;
    std::vector<double> lags;  // arrival - generation, per event
};

/// Runs every event of the session (presses and releases alike) through one
/// mix state in time order. Output arrival times are quantized to whole
/// milliseconds; order, keys, and actions are unchanged.
MixedSession apply_mix(const Session& session, const MixSpec& mix, NoiseSource& noise);

/// Noise seed for one session, derived from the run seed and the session's
/// identity so sessions can be mixed independently and in any order.
std::uint64_t session_noise_seed(std::uint64_t seed, const Session& session);

/// apply_mix over a whole cohort with per-session seeded noise.
std::vector<MixedSession> apply_mix(const std::vector<Session>& sessions, const MixSpec& mix,
                                    std::uint64_t seed);

}  // namespace keymix
