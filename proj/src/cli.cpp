#include "keymix/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "keymix/experiment.hpp"
#include "keymix/features.hpp"
#include "keymix/metrics.hpp"
#include "keymix/mixes.hpp"

#ifndef KEYMIX_VERSION
#define KEYMIX_VERSION "0.0.0"
#endif

namespace keymix::cli {

namespace {

using nlohmann::json;

struct InputOptions {
    std::string input;
    std::string synth;
    std::string labels;
};

struct RunOptions {
    std::uint64_t seed = 1;
    std::string out_dir = "keymix-out";
    bool check = false;
};

struct MixOptions {
    std::optional<double> delay;
    bool interval = false;
    double gain = 1.0;
    double epsilon = 1.0;
    double u0 = 100.0;
};

struct EvalOptions {
    std::string grid;
    std::size_t bins = 8;
    std::size_t min_observations = 5;
    std::size_t trees = 200;
    std::size_t folds = 10;
    bool no_traits = false;
};

std::uint64_t sub_seed(std::uint64_t seed, std::string_view role) { return derive_seed(seed, role); }

std::vector<Session> load_sessions(const InputOptions& in, std::uint64_t seed) {
    if (in.input.empty() == in.synth.empty())
        throw CLI::ValidationError("input", "give exactly one of an input log or --synth");
    std::vector<Session> sessions;
    if (!in.synth.empty()) {
        sessions = synth::generate_cohort(parse_synth_spec(in.synth, sub_seed(seed, "cohort")));
    } else {
        sessions = parse_log(read_file(in.input));
    }
    if (!in.labels.empty()) attach_labels(sessions, parse_labels(read_file(in.labels)));
    return sessions;
}

json provenance(std::string_view command, const InputOptions& in, const RunOptions& run) {
    return {{"tool", "keymix"},
            {"version", KEYMIX_VERSION},
            {"command", std::string(command)},
            {"seed", run.seed},
            {"input", in.input.empty() ? json(nullptr) : json(in.input)},
            {"synth", in.synth.empty() ? json(nullptr) : json(in.synth)},
            {"labels", in.labels.empty() ? json(nullptr) : json(in.labels)}};
}

std::string out_path(const RunOptions& run, const std::string& name) {
    return (std::filesystem::path(run.out_dir) / name).string();
}

void write_json(const std::string& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

IntervalMixParams interval_params(const MixOptions& m) {
    IntervalMixParams p;
    p.gain = m.gain;
    p.epsilon = m.epsilon;
    p.initial_bound = m.u0;
    return p;
}

// Order and bound violations of a mixed cohort against its source.
std::vector<std::string> check_mixed(const std::vector<Session>& original,
                                     const std::vector<MixedSession>& mixed,
                                     std::optional<double> max_delay) {
    std::vector<std::string> problems;
    auto report = [&](const Session& s, const std::string& what) {
        if (problems.size() < 20) problems.push_back(s.user_id + "/" + s.session_id + ": " + what);
    };
    for (std::size_t i = 0; i < original.size(); ++i) {
        const auto& src = original[i];
        const auto& dst = mixed[i].session;
        if (src.events.size() != dst.events.size()) {
            report(src, "event count changed");
            continue;
        }
        for (std::size_t n = 0; n < src.events.size(); ++n) {
            const auto& a = src.events[n];
            const auto& b = dst.events[n];
            if (a.key != b.key || a.action != b.action) report(src, "event order changed");
            if (n > 0 && b.time < dst.events[n - 1].time) report(src, "arrival times decrease");
            const double lag = mixed[i].lags[n];
            if (lag < 0.0) report(src, "event released before it was generated");
            if (max_delay && lag > *max_delay) report(src, "lag exceeds the delay bound");
        }
    }
    return problems;
}

int finish_check(bool check, const std::vector<std::string>& problems, std::ostream& err) {
    if (!check) return kOk;
    for (const auto& p : problems) err << "check: " << p << '\n';
    return problems.empty() ? kOk : kCheckFailed;
}

int cmd_mix(const InputOptions& in, const RunOptions& run, const MixOptions& m, std::ostream& out,
            std::ostream& err) {
    if (m.delay.has_value() == m.interval)
        throw CLI::ValidationError("mix", "choose exactly one of --delay or --interval");
    const auto sessions = load_sessions(in, run.seed);
    const MixSpec spec = m.delay ? MixSpec{DelayMixParams{*m.delay}} : MixSpec{interval_params(m)};
    const auto mixed = apply_mix(sessions, spec, sub_seed(run.seed, "mix"));

    std::vector<Session> result;
    std::vector<double> lags;
    for (const auto& s : mixed) {
        result.push_back(s.session);
        lags.insert(lags.end(), s.lags.begin(), s.lags.end());
    }
    json summary = provenance("mix", in, run);
    summary["mix"] = m.delay ? json{{"kind", "delay"}, {"delta", *m.delay}}
                             : json{{"kind", "interval"}, {"b", m.gain}, {"epsilon", m.epsilon},
                                    {"u0", m.u0}};
    summary["lag"] = {{"count", lags.size()},
                      {"mean", lags.empty() ? 0.0 : metrics::mean_lag(lags)},
                      {"max", lags.empty() ? 0.0 : *std::max_element(lags.begin(), lags.end())}};

    write_file_atomic(out_path(run, "mixed.csv"), write_log(result));
    write_json(out_path(run, "lags.json"), summary);
    out << "mixed " << lags.size() << " events from " << sessions.size() << " sessions, mean lag "
        << summary["lag"]["mean"].get<double>() << " ms -> " << run.out_dir << '\n';
    return finish_check(run.check, check_mixed(sessions, mixed, m.delay), err);
}

std::vector<double> grid_for(const EvalOptions& e, MixKind kind) {
    return e.grid.empty() ? default_grid(kind) : parse_grid(e.grid);
}

std::vector<std::string> check_grid(const std::vector<Session>& sessions, MixKind kind,
                                    const std::vector<double>& grid, const IntervalMixParams& ip,
                                    std::uint64_t seed) {
    std::vector<std::string> problems;
    for (double v : grid) {
        const auto mix = mix_for(kind, v, ip);
        if (!mix) continue;
        const auto mixed = apply_mix(sessions, *mix, seed);
        const auto p = check_mixed(sessions, mixed, kind == MixKind::Delay ? std::optional(v) : std::nullopt);
        problems.insert(problems.end(), p.begin(), p.end());
    }
    return problems;
}

int cmd_eval(const InputOptions& in, const RunOptions& run, const MixOptions& m,
             const EvalOptions& e, std::ostream& out, std::ostream& err) {
    const auto sessions = load_sessions(in, run.seed);
    ExperimentConfig config;
    config.input_type = in.synth.empty() ? std::filesystem::path(in.input).stem().string() : "synthetic";
    config.kind = m.interval ? MixKind::Interval : MixKind::Delay;
    config.grid = grid_for(e, config.kind);
    config.seed = sub_seed(run.seed, "mix");
    config.features.min_observations = e.min_observations;
    config.forest.n_trees = e.trees;
    config.forest.seed = sub_seed(run.seed, "forest");
    config.interval = interval_params(m);
    config.max_folds = e.folds;
    config.evaluate_traits = !e.no_traits;

    const auto report = run_experiment(sessions, config);
    json doc = provenance("eval", in, run);
    doc["config"] = {{"mix", std::string(to_string(config.kind))},
                     {"grid", config.grid},
                     {"epsilon", m.epsilon},
                     {"u0", m.u0},
                     {"min_observations", e.min_observations},
                     {"trees", e.trees},
                     {"folds", e.folds}};
    doc["report"] = report_json(report);

    write_file_atomic(out_path(run, "report.csv"), report_csv(report));
    write_json(out_path(run, "report.json"), doc);
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    out << report_csv(report);

    const auto problems = run.check ? check_grid(sessions, config.kind, config.grid, config.interval,
                                                 config.seed)
                                    : std::vector<std::string>{};
    return finish_check(run.check, problems, err);
}

int cmd_mi(const InputOptions& in, const RunOptions& run, const MixOptions& m, const EvalOptions& e,
           std::ostream& out, std::ostream& err) {
    const auto sessions = load_sessions(in, run.seed);
    const MixKind kind = m.interval ? MixKind::Interval : MixKind::Delay;
    const auto grid = grid_for(e, kind);
    const auto ip = interval_params(m);
    const auto rows = run_mi(sessions, kind, grid, sub_seed(run.seed, "mix"), e.bins, ip);

    json doc = provenance("mi", in, run);
    doc["config"] = {{"mix", std::string(to_string(kind))},
                     {"grid", grid},
                     {"bins", e.bins},
                     {"epsilon", m.epsilon},
                     {"u0", m.u0}};
    doc["report"] = mi_json(kind, rows);
    write_file_atomic(out_path(run, "mi.csv"), mi_csv(kind, rows));
    write_json(out_path(run, "mi.json"), doc);
    out << mi_csv(kind, rows);

    const auto problems = run.check ? check_grid(sessions, kind, grid, ip, sub_seed(run.seed, "mix"))
                                    : std::vector<std::string>{};
    return finish_check(run.check, problems, err);
}

int cmd_synth(const InputOptions& in, const RunOptions& run, std::ostream& out) {
    const std::string spec = in.synth.empty() ? std::string("users=10,sessions=10,chars=fixed:20") : in.synth;
    const auto sessions = synth::generate_cohort(parse_synth_spec(spec, sub_seed(run.seed, "cohort")));
    write_file_atomic(out_path(run, "cohort.csv"), write_log(sessions));
    write_file_atomic(out_path(run, "labels.csv"), write_labels(sessions));
    out << "wrote " << sessions.size() << " sessions -> " << run.out_dir << '\n';
    return kOk;
}

int cmd_features(const InputOptions& in, const RunOptions& run, const EvalOptions& e,
                 std::ostream& out) {
    const auto sessions = load_sessions(in, run.seed);
    FeatureSpec spec = FeatureSpec::standard();
    spec.min_observations = e.min_observations;
    const auto features = extract_all(sessions, spec);
    write_file_atomic(out_path(run, "features.csv"), write_features_csv(sessions, features));
    json names = json::array();
    for (std::size_t i = 0; i < spec.size(); ++i) names.push_back(spec.feature_name(i));
    json doc = provenance("features", in, run);
    doc["columns"] = names;
    write_json(out_path(run, "features.json"), doc);
    out << "wrote " << features.size() << " feature vectors of length " << spec.size() << " -> "
        << run.out_dir << '\n';
    return kOk;
}

}  // namespace

synth::CohortParams parse_synth_spec(const std::string& spec, std::uint64_t seed) {
    auto params = synth::standard_cohort(seed);
    std::stringstream ss(spec);
    std::string item;
    auto to_size = [](const std::string& key, const std::string& v) {
        std::size_t out = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || p != v.data() + v.size() || v.empty())
            throw std::invalid_argument("synth spec: " + key + " needs a non-negative integer, got '" +
                                        v + "'");
        return out;
    };
    auto to_double = [](const std::string& key, const std::string& v) {
        char* end = nullptr;
        const double d = std::strtod(v.c_str(), &end);
        if (v.empty() || *end != '\0') throw std::invalid_argument("synth spec: bad number for " + key);
        return d;
    };
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("synth spec: expected key=value, got '" + item + "'");
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        if (key == "users") {
            params.n_users = to_size(key, value);
        } else if (key == "sessions") {
            params.sessions_per_user = to_size(key, value);
        } else if (key == "chars") {
            if (value == "norm") params.length = synth::NormalLength{};
            else if (value.rfind("fixed:", 0) == 0) params.length = synth::FixedLength{to_size(key, value.substr(6))};
            else throw std::invalid_argument("synth spec: chars must be fixed:N or norm");
        } else if (key == "dispersion") {
            params.dispersion = to_double(key, value);
        } else if (key == "trait_effect") {
            params.trait_effect = to_double(key, value);
        } else {
            throw std::invalid_argument("synth spec: unknown key '" + key + "'");
        }
    }
    synth::validate(params);
    return params;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (item.empty() || *end != '\0' || !(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("grid values must be non-negative numbers, got '" + item + "'");
        grid.push_back(v);
    }
    if (grid.empty()) throw std::invalid_argument("parameter grid is empty");
    return grid;
}

std::optional<std::uint64_t> seed_from_env() {
    const char* env = std::getenv("KEYMIX_SEED");
    if (!env || !*env) return std::nullopt;
    std::uint64_t v = 0;
    const std::string_view s(env);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Obfuscate keystroke timing with delay and interval mixes, and measure the effect"};
    app.set_version_flag("--version", KEYMIX_VERSION);
    app.require_subcommand(1);

    InputOptions in;
    RunOptions run;
    MixOptions mix;
    EvalOptions ev;
    if (auto env = seed_from_env()) run.seed = *env;

    auto add_input = [&](CLI::App* sub) {
        sub->add_option("input", in.input, "Keystroke log (user,session,key,action,time_ms)");
        sub->add_option("--synth", in.synth,
                        "Synthetic cohort instead of a log: users=U,sessions=K,chars=fixed:N|norm");
        sub->add_option("--labels", in.labels, "Trait sidecar (user,age_group,gender,handedness)");
    };
    auto add_run = [&](CLI::App* sub) {
        sub->add_option("--seed", run.seed, "Seed for every random choice (default: $KEYMIX_SEED or 1)");
        sub->add_option("--out", run.out_dir, "Output directory")->capture_default_str();
        sub->add_flag("--check", run.check, "Validate order and lag bounds of mixed output");
    };
    auto add_interval = [&](CLI::App* sub) {
        sub->add_option("--eps", mix.epsilon, "Interval mix floor epsilon, ms")->capture_default_str();
        sub->add_option("--u0", mix.u0, "Interval mix initial bound, ms")->capture_default_str();
    };

    auto* mix_cmd = app.add_subcommand("mix", "Mix a keystroke log");
    add_input(mix_cmd);
    add_run(mix_cmd);
    auto* delay_opt = mix_cmd->add_option("--delay", mix.delay, "Delay mix with bound DELTA ms");
    auto* interval_flag = mix_cmd->add_flag("--interval", mix.interval, "Interval mix");
    delay_opt->excludes(interval_flag);
    mix_cmd->add_option("--b", mix.gain, "Interval mix gain b")->capture_default_str();
    add_interval(mix_cmd);

    auto add_grid = [&](CLI::App* sub) {
        sub->add_flag("--interval", mix.interval, "Sweep the interval mix gain b instead of the delay bound");
        sub->add_option("--grid", ev.grid, "Comma-separated parameter values (default: the standard grid)");
        add_interval(sub);
    };

    auto* eval_cmd = app.add_subcommand("eval", "Attack accuracy, lag, and SMAPE across a parameter grid");
    add_input(eval_cmd);
    add_run(eval_cmd);
    add_grid(eval_cmd);
    eval_cmd->add_option("--min-obs", ev.min_observations, "Observations before a key group falls back")
        ->capture_default_str();
    eval_cmd->add_option("--trees", ev.trees, "Random forest size")->capture_default_str();
    eval_cmd->add_option("--folds", ev.folds, "Identity cross-validation folds")->capture_default_str();
    eval_cmd->add_flag("--no-traits", ev.no_traits, "Skip the soft-trait attacks");

    auto* mi_cmd = app.add_subcommand("mi", "Mutual information of intervals across a parameter grid");
    add_input(mi_cmd);
    add_run(mi_cmd);
    add_grid(mi_cmd);
    mi_cmd->add_option("--bins", ev.bins, "Equal-frequency bins per marginal")->capture_default_str();

    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic cohort and its labels");
    synth_cmd->add_option("--synth", in.synth, "Cohort spec: users=U,sessions=K,chars=fixed:N|norm");
    add_run(synth_cmd);

    auto* features_cmd = app.add_subcommand("features", "Export the feature matrix");
    add_input(features_cmd);
    add_run(features_cmd);
    features_cmd->add_option("--min-obs", ev.min_observations, "Observations before a key group falls back")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (mix_cmd->parsed()) return cmd_mix(in, run, mix, out, err);
        if (eval_cmd->parsed()) return cmd_eval(in, run, mix, ev, out, err);
        if (mi_cmd->parsed()) return cmd_mi(in, run, mix, ev, out, err);
        if (synth_cmd->parsed()) return cmd_synth(in, run, out);
        if (features_cmd->parsed()) return cmd_features(in, run, ev, out);
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kUsageError;
}

}  // namespace keymix::cli
