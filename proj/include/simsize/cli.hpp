#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace simsize {

/// Runs the command-line tool on `args` (without the program name).
/// Returns 0 on success, 1 on usage or domain errors, 2 on runtime errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace simsize
