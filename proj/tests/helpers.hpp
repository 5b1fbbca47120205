#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "keymix/events.hpp"

namespace keymix::test {

// Session of press events only, one per time.
inline Session press_session(const std::vector<double>& times, const std::string& user = "u1",
                             const std::string& session = "s1") {
    Session s{user, session, {}, {}};
    for (double t : times) s.events.push_back({t, Action::Press, "a", user, session});
    return s;
}

// Alternating press and release of distinct keys: press i at presses[i],
// held for durations[i].
inline Session typed_session(const std::vector<double>& presses, const std::vector<double>& durations,
                             const std::string& user = "u1", const std::string& session = "s1") {
    Session s{user, session, {}, {}};
    for (std::size_t i = 0; i < presses.size(); ++i) {
        const std::string key(1, static_cast<char>('a' + i % 26));
        s.events.push_back({presses[i], Action::Press, key, user, session});
        s.events.push_back({presses[i] + durations[i], Action::Release, key, user, session});
    }
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const KeyEvent& a, const KeyEvent& b) { return a.time < b.time; });
    return s;
}

inline std::vector<double> times_of(const Session& s) {
    std::vector<double> out;
    for (const auto& e : s.events) out.push_back(e.time);
    return out;
}

}  // namespace keymix::test
