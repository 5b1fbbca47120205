#include "keymix/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace keymix {

namespace {

// Welford accumulator; stddev is the population form.
struct Moments {
    std::size_t count = 0;
    double mean_ = 0.0;
    double m2 = 0.0;

    void add(double v) {
        ++count;
        const double d = v - mean_;
        mean_ += d / static_cast<double>(count);
        m2 += d * (v - mean_);
    }
    double mean() const { return mean_; }
    double stddev() const { return std::sqrt(std::max(m2 / static_cast<double>(count), 0.0)); }
};

// Groups containing the key, root first.
std::vector<std::size_t> group_path(const FeatureSpec& spec, const std::string& key) {
    std::vector<std::size_t> path{0};
    std::size_t node = 0;
    for (;;) {
        std::optional<std::size_t> match, fallback;
        for (std::size_t g = 1; g < spec.groups.size(); ++g) {
            const auto& group = spec.groups[g];
            if (group.parent != node) continue;
            if (group.keys.count(key)) {
                match = g;
                break;
            }
            if (group.catch_all && !fallback) fallback = g;
        }
        if (!match) match = fallback;
        if (!match) return path;
        path.push_back(*match);
        node = *match;
    }
}

}  // namespace

std::string normalize_key(const std::string& key) {
    if (key == " ") return "space";
    std::string out = key;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

FeatureSpec FeatureSpec::standard() {
    FeatureSpec spec;
    spec.groups.push_back({"all", std::nullopt, {}, false});
    spec.groups.push_back({"space", 0, {"space"}, false});
    spec.groups.push_back({"frequent", 0, {"e", "t", "a", "o", "i", "n", "s", "h", "r", "d"}, false});
    spec.groups.push_back({"other", 0, {}, true});
    return spec;
}

std::string FeatureSpec::feature_name(std::size_t i) const {
    const std::size_t g = i / 4;
    const bool latency = (i / 2) % 2 == 1;
    const bool sd = i % 2 == 1;
    return groups.at(g).name + (latency ? ".pp" : ".du") + (sd ? ".sd" : ".mean");
}

void FeatureSpec::validate() const {
    if (min_observations < 1) throw std::invalid_argument("min_observations must be >= 1");
    if (groups.empty() || groups.front().parent)
        throw std::invalid_argument("key group hierarchy must start with a root group");
    for (std::size_t g = 1; g < groups.size(); ++g) {
        if (!groups[g].parent || *groups[g].parent >= g)
            throw std::invalid_argument("key group '" + groups[g].name +
                                        "' must name an earlier group as parent");
    }
    if (!(latency_clip > 0.0)) throw std::invalid_argument("latency clip must be > 0");
}

FeatureVector extract_features(const Session& session, const FeatureSpec& spec) {
    spec.validate();
    const auto paired = pair_keystrokes(session);
    const auto& ks = paired.keystrokes;
    if (ks.size() < 2)
        throw std::invalid_argument("feature extraction needs at least 2 keystrokes, session " +
                                    session.user_id + "/" + session.session_id + " has " +
                                    std::to_string(ks.size()));

    const std::size_t n_groups = spec.groups.size();
    std::vector<Moments> du(n_groups), pp(n_groups);
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const auto path = group_path(spec, normalize_key(ks[i].key));
        for (std::size_t g : path) du[g].add(ks[i].duration());
        if (i > 0) {
            const double latency =
                std::min(ks[i].press_time - ks[i - 1].press_time, spec.latency_clip);
            for (std::size_t g : path) pp[g].add(latency);
        }
    }

    FeatureVector fv;
    fv.values.assign(spec.size(), 0.0);
    fv.source_group.assign(spec.size(), 0);
    for (std::size_t g = 0; g < n_groups; ++g) {
        for (Measure m : {Measure::Duration, Measure::PressLatency}) {
            const auto& moments = m == Measure::Duration ? du : pp;
            std::size_t source = g;
            while (moments[source].count < spec.min_observations && spec.groups[source].parent)
                source = *spec.groups[source].parent;
            const Moments& mo = moments[source];
            const std::size_t i_mean = FeatureSpec::index(g, m, Statistic::Mean);
            const std::size_t i_sd = FeatureSpec::index(g, m, Statistic::StdDev);
            fv.values[i_mean] = mo.mean();
            fv.values[i_sd] = mo.stddev();
            fv.source_group[i_mean] = source;
            fv.source_group[i_sd] = source;
        }
    }
    return fv;
}

std::string write_features_csv(const std::vector<Session>& sessions,
                               const std::vector<FeatureVector>& features) {
    if (sessions.size() != features.size())
        throw std::invalid_argument("write_features_csv: sessions and features differ in length");
    std::ostringstream out;
    out.precision(17);
    const std::size_t width = features.empty() ? 0 : features.front().values.size();
    out << "user,session_id";
    for (std::size_t j = 0; j < width; ++j) out << ",f" << j;
    out << '\n';
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        out << sessions[i].user_id << ',' << sessions[i].session_id;
        for (double v : features[i].values) out << ',' << v;
        out << '\n';
    }
    return out.str();
}

}  // namespace keymix
