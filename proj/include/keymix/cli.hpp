#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "keymix/synth.hpp"

namespace keymix::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kOk = 0,
    kRuntimeError = 1,  // I/O, parse, or precondition failure
    kUsageError = 2,
    kCheckFailed = 3,   // outputs written but --check found violations
};

/// Parses `users=U,sessions=K,chars=fixed:N|norm[,dispersion=D][,trait_effect=E]`.
/// Unspecified keys keep the standard cohort's values.
synth::CohortParams parse_synth_spec(const std::string& spec, std::uint64_t seed);

/// Parses a comma-separated list of non-negative numbers.
std::vector<double> parse_grid(const std::string& text);

/// Seed from KEYMIX_SEED if set and valid.
std::optional<std::uint64_t> seed_from_env();

/// Runs the tool with the given arguments (argv[0] is the program name).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace keymix::cli
