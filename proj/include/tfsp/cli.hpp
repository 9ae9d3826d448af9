#pragma once

// Command-line driver. Subcommands: solve, evaluate, compare, sweep, reduce,
// gen-demand, export-lp, import-solution.
//
// Settings resolve as flags > --config JSON file > instance params > base
// case defaults, and every JSON output carries the resolved settings under
// "config" (minus output-dir and workers, which never change a result).
// Exit codes: 0 ok, 1 internal error, 2 usage, 3 invalid input or parse
// error, 4 solver failure. Errors are printed to stderr as JSON.

#include <iosfwd>
#include <string>
#include <vector>

namespace tfsp::cli {

// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tfsp::cli
