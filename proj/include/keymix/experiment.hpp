#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "keymix/classify.hpp"
#include "keymix/features.hpp"
#include "keymix/forest.hpp"
#include "keymix/mixes.hpp"

namespace keymix {

enum class MixKind { Delay, Interval };

std::string_view to_string(MixKind kind);

/// Default parameter grids: delay bound in ms, interval-mix gain b.
std::vector<double> default_grid(MixKind kind);

/// Mix for one grid value. For the interval mix, b = 0 denotes the unmixed
/// baseline row and returns nullopt; the delay mix with bound 0 is already the
/// identity.
std::optional<MixSpec> mix_for(MixKind kind, double value, const IntervalMixParams& interval);

struct ExperimentConfig {
    std::string input_type = "synthetic";
    MixKind kind = MixKind::Delay;
    std::vector<double> grid;
    std::uint64_t seed = 0;
    FeatureSpec features = FeatureSpec::standard();
    ForestParams forest;
    IntervalMixParams interval;  // gain is overridden by each grid value
    std::size_t max_folds = 10;
    bool evaluate_traits = true;
};

/// One report row. Column order: parameter, mean lag, identity/age/gender/
/// handedness accuracy, PP and DU SMAPE.
struct ReportRow {
    double parameter = 0.0;
    double mean_lag = 0.0;
    double acc_identity = 0.0;
    std::optional<double> acc_age;
    std::optional<double> acc_gender;
    std::optional<double> acc_handedness;
    double smape_pp = 0.0;
    double smape_du = 0.0;
};

struct ExperimentReport {
    std::string input_type;
    MixKind kind = MixKind::Delay;
    std::vector<ReportRow> rows;
    // Majority-class share per trait on the unmixed cohort (nullopt if the
    // trait could not be evaluated).
    std::optional<double> baseline_age;
    std::optional<double> baseline_gender;
    std::optional<double> baseline_handedness;
    std::vector<std::string> warnings;
};

/// Mixes the cohort at every grid value and runs the identification,
/// soft-trait, and interval-prediction attacks on the result. Grid points are
/// evaluated in parallel; the report does not depend on scheduling.
ExperimentReport run_experiment(const std::vector<Session>& sessions,
                                const ExperimentConfig& config);

std::string report_csv(const ExperimentReport& report);
nlohmann::json report_json(const ExperimentReport& report);

struct MiRow {
    double parameter = 0.0;
    double mi_generated_arrival = 0.0;  // I(tau_gen; tau_arrival), bits
    double mi_two_runs = 0.0;           // I(tau_A; tau_B), bits
    std::size_t samples = 0;
};

/// Mutual information between generated and arrival intervals at each grid
/// value, and between the arrival intervals of two independently seeded runs.
/// Intervals are pooled over sessions; the first interval of each session is
/// undefined and skipped.
std::vector<MiRow> run_mi(const std::vector<Session>& sessions, MixKind kind,
                          const std::vector<double>& grid, std::uint64_t seed, std::size_t bins,
                          const IntervalMixParams& interval);

std::string mi_csv(MixKind kind, const std::vector<MiRow>& rows);
nlohmann::json mi_json(MixKind kind, const std::vector<MiRow>& rows);

/// Event intervals of every session, concatenated.
std::vector<double> pooled_intervals(const std::vector<Session>& sessions);

}  // namespace keymix
