#include "keymix/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "keymix/random.hpp"

namespace keymix::synth {

namespace {

// Relative frequencies of 'a'..'z' in English text (percent), then space.
constexpr std::array<double, kSymbols> kSymbolWeight = {
    8.2, 1.5, 2.8, 4.3, 12.7, 2.2, 2.0, 6.1, 7.0, 0.15, 0.77, 4.0, 2.4, 6.7,
    7.5, 1.9, 0.095, 6.0, 6.3, 9.1, 2.8, 0.98, 2.4, 0.15, 2.0, 0.074, 18.0};

std::string symbol_key(std::size_t s) {
    return s == kSymbols - 1 ? std::string("space") : std::string(1, static_cast<char>('a' + s));
}

std::size_t draw_symbol(Rng& rng) {
    static const double total = [] {
        double t = 0.0;
        for (double w : kSymbolWeight) t += w;
        return t;
    }();
    double r = rng.uniform01() * total;
    for (std::size_t s = 0; s < kSymbols; ++s) {
        r -= kSymbolWeight[s];
        if (r < 0.0) return s;
    }
    return kSymbols - 1;
}

std::string numbered(char prefix, std::size_t i, std::size_t count) {
    const int width = count >= 100 ? 3 : 2;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i + 1);
    return buf;
}

// Exactly round(share * n) users get class `major`, clamped to leave at least
// two users in each class when n >= 4.
template <typename T>
std::vector<T> deal_classes(std::size_t n, double share, T major, T minor, Rng& rng) {
    auto count = static_cast<std::size_t>(std::llround(share * static_cast<double>(n)));
    if (n >= 4) count = std::clamp<std::size_t>(count, 2, n - 2);
    std::vector<T> out(n, minor);
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(std::min(count, n)), major);
    rng.shuffle(out);
    return out;
}

std::size_t draw_length(const LengthModel& model, Rng& rng) {
    if (const auto* fixed = std::get_if<FixedLength>(&model)) return fixed->chars;
    const auto& normal = std::get<NormalLength>(model);
    for (;;) {
        const double v = std::round(rng.normal(normal.mean, normal.sd));
        if (v >= static_cast<double>(normal.min_chars)) return static_cast<std::size_t>(v);
    }
}

}  // namespace

CohortParams standard_cohort(std::uint64_t seed) {
    CohortParams p;
    p.n_users = 10;
    p.sessions_per_user = 10;
    p.length = FixedLength{20};
    p.dispersion = 1.0;
    p.seed = seed;
    return p;
}

void validate(const CohortParams& params) {
    if (params.n_users < 2) throw std::invalid_argument("cohort needs at least 2 users");
    if (params.sessions_per_user < 1)
        throw std::invalid_argument("cohort needs at least 1 session per user");
    if (!(params.dispersion >= 0.0)) throw std::invalid_argument("dispersion must be >= 0");
    if (const auto* fixed = std::get_if<FixedLength>(&params.length); fixed && fixed->chars < 3)
        throw std::invalid_argument("sessions need at least 3 characters");
    if (const auto* normal = std::get_if<NormalLength>(&params.length);
        normal && (normal->min_chars < 3 || !(normal->sd >= 0.0)))
        throw std::invalid_argument("normal length model needs sd >= 0 and min_chars >= 3");
}

std::vector<UserProfile> generate_profiles(const CohortParams& params) {
    validate(params);
    Rng trait_rng(derive_seed(params.seed, "traits"));
    const auto ages = deal_classes(params.n_users, 0.51, AgeGroup::Over30, AgeGroup::Under30, trait_rng);
    const auto genders = deal_classes(params.n_users, 0.68, Gender::Male, Gender::Female, trait_rng);
    const auto hands =
        deal_classes(params.n_users, 0.88, Handedness::Right, Handedness::Left, trait_rng);

    const double d = params.dispersion;
    std::vector<UserProfile> profiles(params.n_users);
    for (std::size_t u = 0; u < params.n_users; ++u) {
        auto& p = profiles[u];
        p.user_id = numbered('u', u, params.n_users);
        p.seed = derive_seed(params.seed, p.user_id);
        p.traits = {ages[u], genders[u], hands[u]};

        Rng rng(derive_seed(p.seed, "profile"));
        // Holds are steadier within a user and more distinct between users
        // than press-press latencies.
        p.pp_log_mean = std::log(kMedianPressLatency) + d * 0.10 * rng.normal();
        p.du_log_mean = std::log(kMedianDuration) + d * 0.25 * rng.normal();
        p.pp_log_sd = 0.50 * std::exp(d * 0.15 * rng.normal());
        p.du_log_sd = 0.12 * std::exp(d * 0.15 * rng.normal());
        for (std::size_t s = 0; s < kSymbols; ++s) {
            p.pp_key_shift[s] = d * 0.10 * rng.normal();
            p.du_key_shift[s] = d * 0.10 * rng.normal();
        }

        const double e = params.trait_effect;
        if (p.traits.age_group == AgeGroup::Over30) p.pp_log_mean += e;
        if (p.traits.gender == Gender::Male) p.du_log_mean += e;
        if (p.traits.handedness == Handedness::Left) p.pp_log_sd *= std::exp(e);
    }
    return profiles;
}

Session generate_session(const UserProfile& profile, const std::string& session_id,
                         std::size_t chars, std::uint64_t seed) {
    Rng rng(seed);
    Session s;
    s.user_id = profile.user_id;
    s.session_id = session_id;
    s.labels = profile.traits;
    s.events.reserve(2 * chars);

    // Index into s.events of the latest release per symbol.
    std::array<std::ptrdiff_t, kSymbols> last_release;
    last_release.fill(-1);

    double t = 0.0;
    for (std::size_t i = 0; i < chars; ++i) {
        const std::size_t sym = draw_symbol(rng);
        if (i > 0) t += rng.lognormal(profile.pp_log_mean + profile.pp_key_shift[sym], profile.pp_log_sd);
        const double hold = rng.lognormal(profile.du_log_mean + profile.du_key_shift[sym], profile.du_log_sd);
        const double press = std::round(t);
        const double release = std::max(std::round(t + hold), press);

        // A key cannot go down again while still held.
        if (last_release[sym] >= 0) {
            auto& prev = s.events[static_cast<std::size_t>(last_release[sym])];
            prev.time = std::min(prev.time, press);
        }
        const std::string key = symbol_key(sym);
        s.events.push_back({press, Action::Press, key, s.user_id, s.session_id});
        last_release[sym] = static_cast<std::ptrdiff_t>(s.events.size());
        s.events.push_back({release, Action::Release, key, s.user_id, s.session_id});
    }
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const KeyEvent& a, const KeyEvent& b) { return a.time < b.time; });
    return s;
}

std::vector<Session> generate_cohort(const CohortParams& params) {
    const auto profiles = generate_profiles(params);
    std::vector<Session> sessions;
    sessions.reserve(params.n_users * params.sessions_per_user);
    for (const auto& p : profiles) {
        Rng length_rng(derive_seed(p.seed, "lengths"));
        for (std::size_t k = 0; k < params.sessions_per_user; ++k) {
            const std::string sid = numbered('s', k, params.sessions_per_user);
            const std::size_t chars = draw_length(params.length, length_rng);
            sessions.push_back(generate_session(p, sid, chars, derive_seed(p.seed, sid)));
        }
    }
    return sessions;
}

Session generate_poisson_stream(double rate, std::size_t n_events, std::uint64_t seed,
                                const std::string& user_id) {
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw std::invalid_argument("Poisson rate must be positive and finite");
    Rng rng(seed);
    Session s;
    s.user_id = user_id;
    s.session_id = "s01";
    s.events.reserve(n_events);
    double t = 0.0;
    std::string key;
    for (std::size_t i = 0; i < n_events; ++i) {
        t += rng.exponential(rate);
        const bool press = i % 2 == 0;
        if (press) key = symbol_key(draw_symbol(rng));
        s.events.push_back({std::round(t), press ? Action::Press : Action::Release, key, s.user_id,
                            s.session_id});
    }
    return s;
}

}  // namespace keymix::synth
