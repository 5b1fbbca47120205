#include "keymix/mixes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "keymix/parallel.hpp"

namespace keymix {

NoiseSource NoiseSource::seeded(std::uint64_t seed) { return NoiseSource(Rng(seed)); }

NoiseSource NoiseSource::scripted(std::vector<double> values) {
    return NoiseSource(Script{std::move(values), 0});
}

double NoiseSource::draw(double lo, double hi) {
    if (auto* rng = std::get_if<Rng>(&impl_)) return std::clamp(rng->uniform(lo, hi), lo, hi);

    auto& script = std::get<Script>(impl_);
    if (script.next >= script.values.size())
        throw NoiseError("scripted noise exhausted after " + std::to_string(script.values.size()) +
                         " values");
    const double v = script.values[script.next];
    if (!(v >= lo && v <= hi)) {
        std::ostringstream msg;
        msg << "scripted value " << v << " (index " << script.next << ") outside [" << lo << ", "
            << hi << "]";
        throw NoiseError(msg.str());
    }
    ++script.next;
    return v;
}

namespace {

void check_order(const std::optional<double>& prev, double gen_time) {
    if (!(gen_time >= 0.0) || !std::isfinite(gen_time))
        throw std::invalid_argument("generation time must be finite and non-negative");
    if (prev && gen_time < *prev) {
        std::ostringstream msg;
        msg << "generation time " << gen_time << " precedes previous event at " << *prev;
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

void validate(const DelayMixParams& params) {
    if (!(params.max_delay >= 0.0) || !std::isfinite(params.max_delay))
        throw std::invalid_argument("delay mix bound must be finite and >= 0");
}

void validate(const IntervalMixParams& params) {
    if (!(params.gain >= 0.0) || !std::isfinite(params.gain))
        throw std::invalid_argument("interval mix gain b must be finite and >= 0");
    if (!(params.epsilon > 0.0)) throw std::invalid_argument("interval mix epsilon must be > 0");
    if (!(params.initial_bound > 0.0))
        throw std::invalid_argument("interval mix initial bound must be > 0");
}

DelayStep delay_mix_step(DelayMixState& state, const DelayMixParams& params, double gen_time,
                         NoiseSource& noise) {
    check_order(state.prev_gen_time, gen_time);

    DelayStep step;
    // The first event has an infinite preceding interval, so its bound is 0.
    if (state.prev_gen_time) {
        const double gap = gen_time - *state.prev_gen_time;
        step.lower_bound = std::max(state.prev_delay - gap, 0.0);
    }
    step.delay = noise.draw(step.lower_bound, params.max_delay);
    step.arrival = gen_time + step.delay;

    state.prev_delay = step.delay;
    state.prev_arrival = step.arrival;
    state.prev_gen_time = gen_time;
    return step;
}

IntervalMixState IntervalMixState::initial(const IntervalMixParams& params) {
    IntervalMixState s;
    s.bound = params.initial_bound;
    return s;
}

IntervalStep interval_mix_step(IntervalMixState& state, const IntervalMixParams& params,
                               double gen_time, NoiseSource& noise) {
    check_order(state.prev_gen_time, gen_time);

    IntervalStep step;
    if (!state.prev_arrival) {
        step.arrival = gen_time;
        state.prev_arrival = gen_time;
        state.prev_gen_time = gen_time;
        return step;
    }

    const double u = state.bound;
    const double interval = noise.draw(0.0, u);
    const double desired = *state.prev_arrival + interval;

    step.bound_used = u;
    step.desired_interval = interval;
    step.desired_time = desired;
    step.arrival = std::max(desired, gen_time);
    step.delay = step.arrival - gen_time;

    state.bound = std::max(u + params.gain * (gen_time - desired), params.epsilon);
    state.prev_arrival = step.arrival;
    state.prev_gen_time = gen_time;
    return step;
}

MixedSession apply_mix(const Session& session, const MixSpec& mix, NoiseSource& noise) {
    MixedSession out;
    out.session = session;
    out.lags.reserve(session.events.size());

    std::visit(
        [&](const auto& params) {
            validate(params);
            using P = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<P, DelayMixParams>) {
                DelayMixState state;
                const double whole_bound = std::floor(params.max_delay);
                for (auto& ev : out.session.events) {
                    const double gen = ev.time;
                    const auto step = delay_mix_step(state, params, gen, noise);
                    // Rounding is monotone, and capping at gen + floor(bound)
                    // keeps the quantized lag inside [0, bound].
                    ev.time = std::min(std::round(step.arrival), gen + whole_bound);
                    out.lags.push_back(ev.time - gen);
                }
            } else {
                auto state = IntervalMixState::initial(params);
                for (auto& ev : out.session.events) {
                    const double gen = ev.time;
                    const auto step = interval_mix_step(state, params, gen, noise);
                    ev.time = std::max(std::round(step.arrival), gen);
                    out.lags.push_back(ev.time - gen);
                }
            }
        },
        mix);
    return out;
}

std::uint64_t session_noise_seed(std::uint64_t seed, const Session& session) {
    return derive_seed(derive_seed(seed, session.user_id), session.session_id);
}

std::vector<MixedSession> apply_mix(const std::vector<Session>& sessions, const MixSpec& mix,
                                    std::uint64_t seed) {
    std::vector<MixedSession> out(sessions.size());
    parallel_for(sessions.size(), [&](std::size_t i) {
        auto noise = NoiseSource::seeded(session_noise_seed(seed, sessions[i]));
        out[i] = apply_mix(sessions[i], mix, noise);
    });
    return out;
}

}  // namespace keymix
