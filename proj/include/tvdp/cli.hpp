#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

namespace tvdp::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kValidationError = 1, kNotConverged = 2 };

/// Entry point behind `tvdp`. Results go to `out` (or --out), diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Parses "start:stop:step"; both endpoints included within 1e-12.
std::vector<double> parse_grid(std::string_view spec);

}  // namespace tvdp::cli
