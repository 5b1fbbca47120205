#include "keymix/experiment.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "keymix/metrics.hpp"
#include "keymix/parallel.hpp"

namespace keymix {

namespace {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string format_parameter(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string_view parameter_column(MixKind kind) { return kind == MixKind::Delay ? "delta" : "b"; }

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

// Sessions with the mix applied, plus pooled lags. nullopt mix = unmixed.
std::pair<std::vector<Session>, std::vector<double>> mix_cohort(
    const std::vector<Session>& sessions, const std::optional<MixSpec>& mix, std::uint64_t seed) {
    if (!mix) {
        std::size_t events = 0;
        for (const auto& s : sessions) events += s.events.size();
        return {sessions, std::vector<double>(events, 0.0)};
    }
    auto mixed = apply_mix(sessions, *mix, seed);
    std::vector<Session> out;
    std::vector<double> lags;
    out.reserve(mixed.size());
    for (auto& m : mixed) {
        lags.insert(lags.end(), m.lags.begin(), m.lags.end());
        out.push_back(std::move(m.session));
    }
    return {std::move(out), std::move(lags)};
}

}  // namespace

std::string_view to_string(MixKind kind) { return kind == MixKind::Delay ? "delay" : "interval"; }

std::vector<double> default_grid(MixKind kind) {
    if (kind == MixKind::Delay) return {0, 50, 100, 200, 500, 1000};
    return {0, 0.1, 0.5, 1.0, 1.5, 2.0};
}

std::optional<MixSpec> mix_for(MixKind kind, double value, const IntervalMixParams& interval) {
    if (kind == MixKind::Delay) {
        DelayMixParams p{value};
        validate(p);
        return MixSpec{p};
    }
    if (value == 0.0) return std::nullopt;
    IntervalMixParams p = interval;
    p.gain = value;
    validate(p);
    return MixSpec{p};
}

ExperimentReport run_experiment(const std::vector<Session>& sessions,
                                const ExperimentConfig& config) {
    if (sessions.empty()) throw std::invalid_argument("run_experiment: no sessions");
    if (config.grid.empty()) throw std::invalid_argument("run_experiment: empty parameter grid");
    std::vector<std::optional<MixSpec>> mixes;
    for (double v : config.grid) mixes.push_back(mix_for(config.kind, v, config.interval));

    ExperimentReport report;
    report.input_type = config.input_type;
    report.kind = config.kind;

    std::vector<std::string> users;
    for (const auto& s : sessions) users.push_back(s.user_id);

    // Decide up front which traits can be evaluated, so every row agrees.
    struct TraitJob {
        Trait trait;
        std::vector<int> labels;
    };
    std::vector<TraitJob> traits;
    if (config.evaluate_traits) {
        for (Trait t : {Trait::Age, Trait::Gender, Trait::Handedness}) {
            TraitJob job{t, {}};
            bool complete = true;
            for (const auto& s : sessions) {
                const auto c = trait_class(s.labels, t);
                if (!c) {
                    complete = false;
                    break;
                }
                job.labels.push_back(*c);
            }
            if (!complete) {
                report.warnings.push_back(std::string(to_string(t)) +
                                          ": labels missing, column reported as null");
                continue;
            }
            std::map<int, std::set<std::string>> users_per_class;
            for (std::size_t i = 0; i < sessions.size(); ++i)
                users_per_class[job.labels[i]].insert(users[i]);
            bool enough = users_per_class.size() >= 2;
            for (const auto& [c, u] : users_per_class) enough = enough && u.size() >= 2;
            if (!enough) {
                report.warnings.push_back(std::string(to_string(t)) +
                                          ": fewer than two users in some class, column reported as null");
                continue;
            }
            traits.push_back(std::move(job));
        }
    }

    report.rows.resize(config.grid.size());
    std::vector<std::vector<std::optional<double>>> trait_acc(
        config.grid.size(), std::vector<std::optional<double>>(3));
    std::vector<std::optional<double>> baselines(3);

    parallel_for(config.grid.size(), [&](std::size_t g) {
        auto [mixed, lags] = mix_cohort(sessions, mixes[g], config.seed);
        const auto features = extract_all(mixed, config.features);

        ReportRow& row = report.rows[g];
        row.parameter = config.grid[g];
        row.mean_lag = metrics::mean_lag(lags);
        row.acc_identity = identity_cv(features, users, config.forest, config.max_folds).accuracy;
        for (const auto& job : traits) {
            const auto r = soft_trait_cv(features, users, job.labels, config.forest);
            trait_acc[g][static_cast<std::size_t>(job.trait)] = r.accuracy;
            if (g == 0) baselines[static_cast<std::size_t>(job.trait)] = r.majority_baseline;
        }
        const auto err = predict_intervals(mixed);
        row.smape_pp = err.smape_pp;
        row.smape_du = err.smape_du;
    });

    for (std::size_t g = 0; g < report.rows.size(); ++g) {
        report.rows[g].acc_age = trait_acc[g][static_cast<std::size_t>(Trait::Age)];
        report.rows[g].acc_gender = trait_acc[g][static_cast<std::size_t>(Trait::Gender)];
        report.rows[g].acc_handedness = trait_acc[g][static_cast<std::size_t>(Trait::Handedness)];
    }
    report.baseline_age = baselines[static_cast<std::size_t>(Trait::Age)];
    report.baseline_gender = baselines[static_cast<std::size_t>(Trait::Gender)];
    report.baseline_handedness = baselines[static_cast<std::size_t>(Trait::Handedness)];
    return report;
}

std::string report_csv(const ExperimentReport& report) {
    std::string out(parameter_column(report.kind));
    out += ",mean_lag,id,age,gen,han,pp,du\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : "null"; };
    for (const auto& r : report.rows) {
        out += format_parameter(r.parameter) + ',' + format_number(r.mean_lag) + ',' +
               format_number(r.acc_identity) + ',' + opt(r.acc_age) + ',' + opt(r.acc_gender) +
               ',' + opt(r.acc_handedness) + ',' + format_number(r.smape_pp) + ',' +
               format_number(r.smape_du) + '\n';
    }
    return out;
}

nlohmann::json report_json(const ExperimentReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{std::string(parameter_column(report.kind)), r.parameter},
                        {"mean_lag", r.mean_lag},
                        {"id", r.acc_identity},
                        {"age", optional_json(r.acc_age)},
                        {"gen", optional_json(r.acc_gender)},
                        {"han", optional_json(r.acc_handedness)},
                        {"pp", r.smape_pp},
                        {"du", r.smape_du}});
    }
    return {{"input_type", report.input_type},
            {"mix", std::string(to_string(report.kind))},
            {"columns", {std::string(parameter_column(report.kind)), "mean_lag", "id", "age", "gen",
                         "han", "pp", "du"}},
            {"rows", rows},
            {"majority_baseline",
             {{"age", optional_json(report.baseline_age)},
              {"gen", optional_json(report.baseline_gender)},
              {"han", optional_json(report.baseline_handedness)}}},
            {"warnings", report.warnings}};
}

std::vector<double> pooled_intervals(const std::vector<Session>& sessions) {
    std::vector<double> out;
    for (const auto& s : sessions) {
        const auto iv = event_intervals(s);
        out.insert(out.end(), iv.begin(), iv.end());
    }
    return out;
}

std::vector<MiRow> run_mi(const std::vector<Session>& sessions, MixKind kind,
                          const std::vector<double>& grid, std::uint64_t seed, std::size_t bins,
                          const IntervalMixParams& interval) {
    if (grid.empty()) throw std::invalid_argument("run_mi: empty parameter grid");
    const auto generated = pooled_intervals(sessions);
    const std::uint64_t seed_b = derive_seed(seed, "second-run");

    std::vector<MiRow> rows(grid.size());
    parallel_for(grid.size(), [&](std::size_t g) {
        const auto mix = mix_for(kind, grid[g], interval);
        const auto run_a = pooled_intervals(mix_cohort(sessions, mix, seed).first);
        const auto run_b = pooled_intervals(mix_cohort(sessions, mix, seed_b).first);
        const std::size_t n = std::min(run_a.size(), run_b.size());

        MiRow& row = rows[g];
        row.parameter = grid[g];
        row.samples = run_a.size();
        row.mi_generated_arrival = metrics::mutual_information(generated, run_a, bins);
        row.mi_two_runs = metrics::mutual_information(std::span(run_a).first(n),
                                                      std::span(run_b).first(n), bins);
    });
    return rows;
}

std::string mi_csv(MixKind kind, const std::vector<MiRow>& rows) {
    std::string out(parameter_column(kind));
    out += ",samples,mi_generated_arrival,mi_two_runs\n";
    for (const auto& r : rows)
        out += format_parameter(r.parameter) + ',' + std::to_string(r.samples) + ',' +
               format_number(r.mi_generated_arrival) + ',' + format_number(r.mi_two_runs) + '\n';
    return out;
}

nlohmann::json mi_json(MixKind kind, const std::vector<MiRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
        arr.push_back({{std::string(parameter_column(kind)), r.parameter},
                       {"samples", r.samples},
                       {"mi_generated_arrival", r.mi_generated_arrival},
                       {"mi_two_runs", r.mi_two_runs}});
    return {{"mix", std::string(to_string(kind))}, {"unit", "bits"}, {"rows", arr}};
}

}  // namespace keymix
