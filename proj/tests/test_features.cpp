#include <stdexcept>

#include "doctest.h"
#include "helpers.hpp"
#include "keymix/features.hpp"
#include "keymix/mixes.hpp"

using namespace keymix;
using keymix::test::typed_session;

namespace {

std::size_t idx(std::size_t g, Measure m, Statistic s) { return FeatureSpec::index(g, m, s); }

}  // namespace

TEST_CASE("standard spec layout") {
    const auto spec = FeatureSpec::standard();
    CHECK(spec.size() == 16);
    CHECK(spec.feature_name(0) == "all.du.mean");
    CHECK(spec.feature_name(3) == "all.pp.sd");
    CHECK(spec.feature_name(4) == "space.du.mean");
    CHECK(idx(2, Measure::PressLatency, Statistic::StdDev) == 11);
    CHECK_NOTHROW(spec.validate());

    FeatureSpec bad = spec;
    bad.groups[1].parent = 5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = spec;
    bad.min_observations = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("key normalization") {
    CHECK(normalize_key(" ") == "space");
    CHECK(normalize_key("E") == "e");
    CHECK(normalize_key("Shift") == "shift");
}

TEST_CASE("constant keystrokes give constant features") {
    std::vector<double> presses;
    for (int i = 0; i < 30; ++i) presses.push_back(150.0 * i);
    auto spec = FeatureSpec::standard();
    spec.min_observations = 1;
    const auto fv = extract_features(typed_session(presses, std::vector<double>(30, 90.0)), spec);
    for (std::size_t g = 0; g < spec.groups.size(); ++g) {
        CHECK(fv.values[idx(g, Measure::Duration, Statistic::Mean)] == 90.0);
        CHECK(fv.values[idx(g, Measure::Duration, Statistic::StdDev)] == 0.0);
        CHECK(fv.values[idx(g, Measure::PressLatency, Statistic::Mean)] == 150.0);
        CHECK(fv.values[idx(g, Measure::PressLatency, Statistic::StdDev)] == 0.0);
    }
}

TEST_CASE("sparse groups fall back to their parent") {
    FeatureSpec spec;
    spec.groups.push_back({"all", std::nullopt, {}, false});
    spec.groups.push_back({"left", 0, {"q"}, false});
    spec.groups.push_back({"rest", 0, {}, true});
    spec.min_observations = 5;

    Session s{"u1", "s1", {}, {}};
    const char* keys[] = {"a", "b", "q", "c", "d", "e", "f", "g"};
    double t = 0;
    for (const char* k : keys) {
        s.events.push_back({t, Action::Press, k, "u1", "s1"});
        s.events.push_back({t + 80 + t / 10, Action::Release, k, "u1", "s1"});
        t += 200;
    }
    const auto fv = extract_features(s, spec);
    for (std::size_t f = 4; f < 8; ++f) {
        CHECK(fv.is_fallback(f));
        CHECK(fv.values[f] == fv.values[f - 4]);
    }
    for (std::size_t f = 8; f < 12; ++f) CHECK_FALSE(fv.is_fallback(f));
    CHECK(fv.values[idx(2, Measure::Duration, Statistic::Mean)] !=
          fv.values[idx(0, Measure::Duration, Statistic::Mean)]);
}

TEST_CASE("press latency of the delay-mixed example stream") {
    // Presses of the mixed example arrive at 3, 11, 12, 16, 20.
    const auto s = typed_session({0, 5, 7, 11, 14}, std::vector<double>(5, 100.0));
    Session presses_only{"u1", "s1", {}, {}};
    for (const auto& e : s.events)
        if (e.action == Action::Press) presses_only.events.push_back(e);
    auto noise = NoiseSource::scripted({3, 6, 5, 5, 6});
    const auto mixed = apply_mix(presses_only, DelayMixParams{7}, noise).session;
    std::vector<double> arrivals;
    for (const auto& e : mixed.events) arrivals.push_back(e.time);

    const auto fv = extract_features(typed_session(arrivals, std::vector<double>(5, 100.0)),
                                     FeatureSpec::standard());
    CHECK(fv.values[idx(0, Measure::PressLatency, Statistic::Mean)] == 4.25);
    CHECK(fv.values[idx(0, Measure::Duration, Statistic::Mean)] == 100.0);
}

TEST_CASE("long pauses are clipped") {
    auto spec = FeatureSpec::standard();
    const auto fv = extract_features(typed_session({0, 100, 20100}, {50, 50, 50}), spec);
    CHECK(fv.values[idx(0, Measure::PressLatency, Statistic::Mean)] == (100.0 + 5000.0) / 2);
}

TEST_CASE("too few keystrokes") {
    CHECK_THROWS_AS(extract_features(typed_session({0}, {50}), FeatureSpec::standard()),
                    std::invalid_argument);
}

TEST_CASE("feature csv") {
    const auto s = typed_session({0, 100, 250}, {50, 60, 70});
    const auto fv = extract_features(s, FeatureSpec::standard());
    const auto csv = write_features_csv({s}, {fv});
    CHECK(csv.rfind("user,session_id,f0,", 0) == 0);
    CHECK(csv.find("\nu1,s1,60,") != std::string::npos);
    CHECK_THROWS_AS(write_features_csv({s, s}, {fv}), std::invalid_argument);
}
