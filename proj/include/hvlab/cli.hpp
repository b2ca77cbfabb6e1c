#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hvlab::cli {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInconsistent = 2;

/*!
 * Runs one command: simulate, correlate, chsh, region-map, audit or
 * table-export. Primary output goes to `out` unless --out names a file;
 * diagnostics go to `err`.
 */
int run(int argc, char const* const* argv, std::ostream& out, std::ostream& err);

/// Same, with the program name omitted from `args`.
int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

}  // namespace hvlab::cli
