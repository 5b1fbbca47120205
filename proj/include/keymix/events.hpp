#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace keymix {

enum class Action : char { Press = 'P', Release = 'R' };

/// One key press or release. Times are milliseconds; files carry whole
/// milliseconds, in memory they are real-valued.
struct KeyEvent {
    double time = 0.0;
    Action action = Action::Press;
    std::string key;
    std::string user_id;
    std::string session_id;

    friend bool operator==(const KeyEvent&, const KeyEvent&) = default;
};

enum class AgeGroup { Under30, Over30 };
enum class Gender { Male, Female };
enum class Handedness { Left, Right };

struct TraitLabels {
    std::optional<AgeGroup> age_group;
    std::optional<Gender> gender;
    std::optional<Handedness> handedness;

    friend bool operator==(const TraitLabels&, const TraitLabels&) = default;
};

enum class Trait { Age, Gender, Handedness };

std::string_view to_string(Trait trait);

/// Integer class code for a trait value (0 or 1), or nullopt if unlabeled.
std::optional<int> trait_class(const TraitLabels& labels, Trait trait);

/// The events of one typing sample, ordered by time with ingestion order kept
/// on ties.
struct Session {
    std::string user_id;
    std::string session_id;
    std::vector<KeyEvent> events;
    TraitLabels labels;

    friend bool operator==(const Session&, const Session&) = default;
};

struct Keystroke {
    double press_time = 0.0;
    double release_time = 0.0;
    std::string key;

    double duration() const { return release_time - press_time; }

    friend bool operator==(const Keystroke&, const Keystroke&) = default;
};

struct PairedKeystrokes {
    std::vector<Keystroke> keystrokes;  // ordered by press time
    std::size_t dropped_presses = 0;    // trailing presses with no release

    /// Press-press latencies between consecutive keystrokes (size n-1).
    std::vector<double> press_latencies() const;
    std::vector<double> durations() const;
};

/// Malformed input. line() is 1-based and counts the header; 0 when the
/// error is not tied to a single row.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

using LabelTable = std::map<std::string, TraitLabels>;

/// Parses `user,session,key,action,time_ms` CSV into sessions ordered by first
/// appearance. Events within a session are stably sorted by time.
std::vector<Session> parse_log(std::string_view csv);

/// Parses the `user,age_group,gender,handedness` sidecar. Empty cells leave the
/// trait unset.
LabelTable parse_labels(std::string_view csv);

void attach_labels(std::vector<Session>& sessions, const LabelTable& labels);

std::string write_log(const std::vector<Session>& sessions);
std::string write_labels(const std::vector<Session>& sessions);

/// Matches each press to the next release of the same key (first in, first
/// out per key). Throws std::invalid_argument on a release without a pending
/// press.
PairedKeystrokes pair_keystrokes(const Session& session);

/// Intervals between consecutive events of the session (size n-1). The
/// interval before the first event is undefined and not included.
std::vector<double> event_intervals(const Session& session);

std::string read_file(const std::string& path);

/// Writes through a temporary file in the same directory and renames it into
/// place.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace keymix
