#include <algorithm>
#include <cmath>
#include <set>

#include <stdexcept>

#include "doctest.h"
#include "keymix/events.hpp"
#include "keymix/metrics.hpp"
#include "keymix/synth.hpp"

using namespace keymix;

namespace {

// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
std::pair<double, double> ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    if (lambda < 1e-3) return {d, 1.0};
    double p = 0;
    for (int k = 1; k <= 100; ++k)
        p += 2 * ((k % 2) ? 1 : -1) * std::exp(-2.0 * k * k * lambda * lambda);
    return {d, std::clamp(p, 0.0, 1.0)};
}

std::size_t chars_of(const Session& s) {
    std::size_t n = 0;
    for (const auto& e : s.events) n += e.action == Action::Press;
    return n;
}

}  // namespace

TEST_CASE("ks oracle sanity") {
    const auto [d_same, p_same] = ks_two_sample({1, 2, 3, 4, 5, 6, 7, 8}, {1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(d_same == 0.0);
    CHECK(p_same == 1.0);
    std::vector<double> lo(200), hi(200);
    for (int i = 0; i < 200; ++i) {
        lo[i] = i;
        hi[i] = i + 1000;
    }
    const auto [d, p] = ks_two_sample(lo, hi);
    CHECK(d == 1.0);
    CHECK(p < 1e-10);
}

TEST_CASE("cohorts are deterministic in the seed") {
    const auto a = synth::generate_cohort(synth::standard_cohort(4));
    const auto b = synth::generate_cohort(synth::standard_cohort(4));
    const auto c = synth::generate_cohort(synth::standard_cohort(5));
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.size() == 100);
    CHECK(a.front().user_id == "u01");
    CHECK(a.front().session_id == "s01");
    CHECK(a.back().user_id == "u10");
}

TEST_CASE("generated sessions are valid logs") {
    auto params = synth::standard_cohort(6);
    params.length = synth::NormalLength{};
    params.n_users = 4;
    const auto cohort = synth::generate_cohort(params);
    CHECK(parse_log(write_log(cohort)).size() == cohort.size());
    for (const auto& s : cohort) {
        const auto paired = pair_keystrokes(s);
        CHECK(paired.dropped_presses == 0);
        CHECK(paired.keystrokes.size() == chars_of(s));
        CHECK(std::is_sorted(s.events.begin(), s.events.end(),
                             [](const KeyEvent& x, const KeyEvent& y) { return x.time < y.time; }));
    }
}

TEST_CASE("fixed and normal session lengths") {
    for (const auto& s : synth::generate_cohort(synth::standard_cohort(1))) CHECK(chars_of(s) == 20);

    auto params = synth::standard_cohort(2);
    params.n_users = 10;
    params.sessions_per_user = 100;
    params.length = synth::NormalLength{};
    double total = 0;
    std::size_t shortest = 1000;
    const auto cohort = synth::generate_cohort(params);
    for (const auto& s : cohort) {
        total += static_cast<double>(chars_of(s));
        shortest = std::min(shortest, chars_of(s));
    }
    CHECK(total / static_cast<double>(cohort.size()) == doctest::Approx(123).epsilon(5.0 / 123));
    CHECK(shortest >= 20);
}

TEST_CASE("trait quotas") {
    const auto profiles = synth::generate_profiles(synth::standard_cohort(1));
    int over30 = 0, male = 0, right = 0;
    for (const auto& p : profiles) {
        over30 += p.traits.age_group == AgeGroup::Over30;
        male += p.traits.gender == Gender::Male;
        right += p.traits.handedness == Handedness::Right;
    }
    CHECK(over30 == 5);
    CHECK(male == 7);
    CHECK(right == 8);  // 9 clamped to leave two left-handed users
}

TEST_CASE("zero dispersion makes identical profiles") {
    auto params = synth::standard_cohort(3);
    params.dispersion = 0;
    const auto profiles = synth::generate_profiles(params);
    for (const auto& p : profiles) {
        CHECK(p.pp_log_mean == profiles[0].pp_log_mean);
        CHECK(p.du_log_sd == profiles[0].du_log_sd);
        CHECK(p.pp_key_shift == profiles[0].pp_key_shift);
    }
}

TEST_CASE("cohort validation") {
    auto params = synth::standard_cohort();
    params.n_users = 1;
    CHECK_THROWS_AS(synth::generate_cohort(params), std::invalid_argument);
    params = synth::standard_cohort();
    params.sessions_per_user = 0;
    CHECK_THROWS_AS(synth::generate_cohort(params), std::invalid_argument);
    params = synth::standard_cohort();
    params.dispersion = -1;
    CHECK_THROWS_AS(synth::generate_cohort(params), std::invalid_argument);
    params = synth::standard_cohort();
    params.length = synth::FixedLength{1};
    CHECK_THROWS_AS(synth::generate_cohort(params), std::invalid_argument);
}

TEST_CASE("poisson streams") {
    CHECK_THROWS_AS(synth::generate_poisson_stream(0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(synth::generate_poisson_stream(-1, 10, 1), std::invalid_argument);

    const auto s = synth::generate_poisson_stream(0.01, 100000, 1);
    const auto tau = event_intervals(s);
    double mean = 0;
    for (double t : tau) mean += t;
    mean /= static_cast<double>(tau.size());
    CHECK(mean == doctest::Approx(100).epsilon(0.01));
    CHECK_NOTHROW(pair_keystrokes(s));

    SUBCASE("same rate streams look alike") {
        const auto a = event_intervals(synth::generate_poisson_stream(0.01, 4000, 2));
        const auto b = event_intervals(synth::generate_poisson_stream(0.01, 4000, 3));
        CHECK(ks_two_sample(a, b).second > 0.01);
        const auto c = event_intervals(synth::generate_poisson_stream(0.02, 4000, 3));
        CHECK(ks_two_sample(a, c).second < 0.01);
    }
    SUBCASE("intervals are memoryless") {
        const std::vector<double> head(tau.begin(), tau.end() - 1);
        const std::vector<double> next(tau.begin() + 1, tau.end());
        CHECK(metrics::mutual_information(head, next) < 0.01);
    }
}
