#include <stdexcept>

#include "doctest.h"
#include "keymix/experiment.hpp"
#include "keymix/metrics.hpp"
#include "keymix/synth.hpp"

using namespace keymix;

namespace {

ExperimentConfig quick_config(MixKind kind, std::vector<double> grid) {
    ExperimentConfig c;
    c.kind = kind;
    c.grid = std::move(grid);
    c.seed = 5;
    c.forest.n_trees = 40;
    c.forest.seed = 6;
    return c;
}

}  // namespace

TEST_CASE("grids and mixes") {
    CHECK(default_grid(MixKind::Delay) == std::vector<double>{0, 50, 100, 200, 500, 1000});
    CHECK(default_grid(MixKind::Interval) == std::vector<double>{0, 0.1, 0.5, 1, 1.5, 2});
    CHECK(to_string(MixKind::Interval) == "interval");
    IntervalMixParams ip;
    ip.epsilon = 2;
    CHECK_FALSE(mix_for(MixKind::Interval, 0, ip).has_value());
    const auto m = mix_for(MixKind::Interval, 1.5, ip);
    REQUIRE(m.has_value());
    CHECK(std::get<IntervalMixParams>(*m).gain == 1.5);
    CHECK(std::get<IntervalMixParams>(*m).epsilon == 2);
    CHECK(std::get<DelayMixParams>(*mix_for(MixKind::Delay, 0, ip)).max_delay == 0);
}

TEST_CASE("delay experiment report") {
    const auto cohort = synth::generate_cohort(synth::standard_cohort(1));
    const auto report = run_experiment(cohort, quick_config(MixKind::Delay, {0, 200}));
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].mean_lag == 0.0);
    CHECK(report.rows[1].mean_lag > 50.0);
    CHECK(report.rows[0].acc_age.has_value());
    CHECK(report.warnings.empty());
    CHECK(report.baseline_age == doctest::Approx(0.5));
    CHECK(report.rows[1].smape_du > report.rows[0].smape_du);

    const auto csv = report_csv(report);
    CHECK(csv.rfind("delta,mean_lag,id,age,gen,han,pp,du\n0,0.000000,", 0) == 0);
    const auto j = report_json(report);
    CHECK(j["rows"].size() == 2);
    CHECK(j["columns"][0] == "delta");
}

TEST_CASE("missing labels yield null trait columns") {
    auto cohort = synth::generate_cohort(synth::standard_cohort(1));
    for (auto& s : cohort) s.labels = {};
    auto config = quick_config(MixKind::Interval, {0, 1});
    const auto report = run_experiment(cohort, config);
    CHECK(report.rows[1].acc_identity > 0.0);
    CHECK_FALSE(report.rows[1].acc_age.has_value());
    CHECK(report.warnings.size() == 3);
    CHECK(report_csv(report).find(",null,null,null,") != std::string::npos);
    CHECK(report_json(report)["rows"][0]["gen"].is_null());
    CHECK(report_csv(report).rfind("b,", 0) == 0);
}

TEST_CASE("experiment preconditions") {
    const auto cohort = synth::generate_cohort(synth::standard_cohort(1));
    CHECK_THROWS_AS(run_experiment({}, quick_config(MixKind::Delay, {0})), std::invalid_argument);
    CHECK_THROWS_AS(run_experiment(cohort, quick_config(MixKind::Delay, {})), std::invalid_argument);
}

TEST_CASE("mutual information across the delay grid") {
    const auto cohort = synth::generate_cohort(synth::standard_cohort(1));
    const auto rows = run_mi(cohort, MixKind::Delay, default_grid(MixKind::Delay), 3, 8, {});
    REQUIRE(rows.size() == 6);

    // Unmixed arrivals carry all of the binned generating entropy.
    const auto tau = pooled_intervals(cohort);
    const auto bins = metrics::quantile_bins(tau, 8);
    std::vector<double> counts(8, 0.0);
    for (auto b : bins) counts[b] += 1;
    CHECK(rows[0].mi_generated_arrival == doctest::Approx(metrics::entropy_bits(counts)).epsilon(1e-12));
    CHECK(rows[0].samples == tau.size());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].mi_generated_arrival <= rows[i - 1].mi_generated_arrival);
        CHECK(rows[i].mi_two_runs <= rows[i].mi_generated_arrival + 1e-12);
    }
    CHECK(mi_csv(MixKind::Delay, rows).rfind("delta,samples,mi_generated_arrival,mi_two_runs\n", 0) == 0);
    CHECK(mi_json(MixKind::Delay, rows)["unit"] == "bits");
}

TEST_CASE("independent poisson streams share no information") {
    const auto a = event_intervals(synth::generate_poisson_stream(0.01, 100001, 21));
    const auto b = event_intervals(synth::generate_poisson_stream(0.01, 100001, 22));
    CHECK(metrics::mutual_information(a, b) < 0.01);
}
