#include "keymix/events.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <utility>

namespace keymix {

namespace {

constexpr std::string_view kLogHeader = "user,session,key,action,time_ms";
constexpr std::string_view kLabelHeader = "user,age_group,gender,handedness";

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    if (quoted) throw ParseError(line_no, "unterminated quoted field");
    fields.push_back(std::move(field));
    return fields;
}

void append_csv_field(std::string& out, std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
        out.append(field);
        return;
    }
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

// Splits on LF, dropping a trailing CR from each line.
std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

std::string format_time(double t) {
    if (!(t >= 0.0) || t != std::floor(t) || t > 9.007199254740992e15) {
        std::ostringstream msg;
        msg << "time " << t << " is not a non-negative whole number of milliseconds";
        throw std::invalid_argument(msg.str());
    }
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<std::int64_t>(t));
    return std::string(buf, end);
}

std::string describe(double t) {
    std::ostringstream s;
    s << t;
    return s.str();
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

std::string_view to_string(Trait trait) {
    switch (trait) {
        case Trait::Age: return "age";
        case Trait::Gender: return "gender";
        case Trait::Handedness: return "handedness";
    }
    return "unknown";
}

std::optional<int> trait_class(const TraitLabels& labels, Trait trait) {
    switch (trait) {
        case Trait::Age:
            if (labels.age_group) return *labels.age_group == AgeGroup::Over30 ? 1 : 0;
            break;
        case Trait::Gender:
            if (labels.gender) return *labels.gender == Gender::Female ? 1 : 0;
            break;
        case Trait::Handedness:
            if (labels.handedness) return *labels.handedness == Handedness::Right ? 1 : 0;
            break;
    }
    return std::nullopt;
}

std::vector<double> PairedKeystrokes::press_latencies() const {
    std::vector<double> pp;
    if (keystrokes.size() < 2) return pp;
    pp.reserve(keystrokes.size() - 1);
    for (std::size_t i = 1; i < keystrokes.size(); ++i)
        pp.push_back(keystrokes[i].press_time - keystrokes[i - 1].press_time);
    return pp;
}

std::vector<double> PairedKeystrokes::durations() const {
    std::vector<double> du;
    du.reserve(keystrokes.size());
    for (const auto& k : keystrokes) du.push_back(k.duration());
    return du;
}

std::vector<Session> parse_log(std::string_view csv) {
    const auto lines = split_lines(csv);
    if (lines.empty() || lines.front() != kLogHeader)
        throw ParseError(1, "expected header '" + std::string(kLogHeader) + "'");

    std::vector<Session> sessions;
    std::map<std::pair<std::string, std::string>, std::size_t> index;

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (lines[i].empty()) continue;
        auto fields = split_csv_line(lines[i], line_no);
        if (fields.size() != 5)
            throw ParseError(line_no, "expected 5 fields, found " + std::to_string(fields.size()));

        KeyEvent ev;
        ev.user_id = std::move(fields[0]);
        ev.session_id = std::move(fields[1]);
        ev.key = std::move(fields[2]);
        if (ev.user_id.empty() || ev.session_id.empty())
            throw ParseError(line_no, "empty user or session id");

        if (fields[3] == "P") {
            ev.action = Action::Press;
        } else if (fields[3] == "R") {
            ev.action = Action::Release;
        } else {
            throw ParseError(line_no, "action must be P or R, found '" + fields[3] + "'");
        }

        const std::string& tf = fields[4];
        if (!tf.empty() && tf.front() == '-') throw ParseError(line_no, "negative time '" + tf + "'");
        std::int64_t t = 0;
        auto [ptr, ec] = std::from_chars(tf.data(), tf.data() + tf.size(), t);
        if (tf.empty() || ec != std::errc() || ptr != tf.data() + tf.size())
            throw ParseError(line_no, "time_ms must be a non-negative integer, found '" + tf + "'");
        ev.time = static_cast<double>(t);

        auto key = std::make_pair(ev.user_id, ev.session_id);
        auto [it, inserted] = index.try_emplace(key, sessions.size());
        if (inserted) {
            Session s;
            s.user_id = ev.user_id;
            s.session_id = ev.session_id;
            sessions.push_back(std::move(s));
        }
        sessions[it->second].events.push_back(std::move(ev));
    }

    for (auto& s : sessions) {
        std::stable_sort(s.events.begin(), s.events.end(),
                         [](const KeyEvent& a, const KeyEvent& b) { return a.time < b.time; });
        std::unordered_map<std::string, std::size_t> pending;
        for (const auto& ev : s.events) {
            if (ev.action == Action::Press) {
                ++pending[ev.key];
            } else {
                auto it = pending.find(ev.key);
                if (it == pending.end() || it->second == 0)
                    throw ParseError(0, "unmatched release of key '" + ev.key + "' at time " +
                                            describe(ev.time) + " (user " + s.user_id +
                                            ", session " + s.session_id + ")");
                --it->second;
            }
        }
    }
    return sessions;
}

LabelTable parse_labels(std::string_view csv) {
    const auto lines = split_lines(csv);
    if (lines.empty() || lines.front() != kLabelHeader)
        throw ParseError(1, "expected header '" + std::string(kLabelHeader) + "'");

    LabelTable table;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (lines[i].empty()) continue;
        auto f = split_csv_line(lines[i], line_no);
        if (f.size() != 4)
            throw ParseError(line_no, "expected 4 fields, found " + std::to_string(f.size()));
        TraitLabels labels;
        if (f[1] == "under30") labels.age_group = AgeGroup::Under30;
        else if (f[1] == "over30") labels.age_group = AgeGroup::Over30;
        else if (!f[1].empty()) throw ParseError(line_no, "bad age_group '" + f[1] + "'");
        if (f[2] == "male") labels.gender = Gender::Male;
        else if (f[2] == "female") labels.gender = Gender::Female;
        else if (!f[2].empty()) throw ParseError(line_no, "bad gender '" + f[2] + "'");
        if (f[3] == "left") labels.handedness = Handedness::Left;
        else if (f[3] == "right") labels.handedness = Handedness::Right;
        else if (!f[3].empty()) throw ParseError(line_no, "bad handedness '" + f[3] + "'");
        if (!table.emplace(f[0], labels).second)
            throw ParseError(line_no, "duplicate user '" + f[0] + "'");
    }
    return table;
}

void attach_labels(std::vector<Session>& sessions, const LabelTable& labels) {
    for (auto& s : sessions) {
        if (auto it = labels.find(s.user_id); it != labels.end()) s.labels = it->second;
    }
}

std::string write_log(const std::vector<Session>& sessions) {
    std::string out(kLogHeader);
    out.push_back('\n');
    for (const auto& s : sessions) {
        for (const auto& ev : s.events) {
            append_csv_field(out, s.user_id);
            out.push_back(',');
            append_csv_field(out, s.session_id);
            out.push_back(',');
            append_csv_field(out, ev.key);
            out.push_back(',');
            out.push_back(static_cast<char>(ev.action));
            out.push_back(',');
            out += format_time(ev.time);
            out.push_back('\n');
        }
    }
    return out;
}

std::string write_labels(const std::vector<Session>& sessions) {
    std::string out(kLabelHeader);
    out.push_back('\n');
    std::map<std::string, bool> seen;
    for (const auto& s : sessions) {
        if (!seen.emplace(s.user_id, true).second) continue;
        const auto& l = s.labels;
        append_csv_field(out, s.user_id);
        out += ',';
        if (l.age_group) out += *l.age_group == AgeGroup::Over30 ? "over30" : "under30";
        out += ',';
        if (l.gender) out += *l.gender == Gender::Male ? "male" : "female";
        out += ',';
        if (l.handedness) out += *l.handedness == Handedness::Left ? "left" : "right";
        out += '\n';
    }
    return out;
}

PairedKeystrokes pair_keystrokes(const Session& session) {
    struct Open {
        std::size_t order;
        double press_time;
    };
    std::unordered_map<std::string, std::deque<Open>> open;
    std::vector<std::pair<std::size_t, Keystroke>> matched;
    std::size_t order = 0;

    for (const auto& ev : session.events) {
        if (ev.action == Action::Press) {
            open[ev.key].push_back({order++, ev.time});
            continue;
        }
        auto it = open.find(ev.key);
        if (it == open.end() || it->second.empty())
            throw std::invalid_argument("unmatched release of key '" + ev.key + "' at time " +
                                        describe(ev.time));
        const Open press = it->second.front();
        it->second.pop_front();
        matched.push_back({press.order, Keystroke{press.press_time, ev.time, ev.key}});
    }

    PairedKeystrokes result;
    for (const auto& [key, q] : open) result.dropped_presses += q.size();
    std::sort(matched.begin(), matched.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    result.keystrokes.reserve(matched.size());
    for (auto& m : matched) result.keystrokes.push_back(std::move(m.second));
    return result;
}

std::vector<double> event_intervals(const Session& session) {
    std::vector<double> out;
    if (session.events.size() < 2) return out;
    out.reserve(session.events.size() - 1);
    for (std::size_t i = 1; i < session.events.size(); ++i)
        out.push_back(session.events[i].time - session.events[i - 1].time);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, target);
}

}  // namespace keymix
