#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crosscut::api {

// Entry point of the `crosscut` command; `args` excludes the program name.
// Returns 0 on success, 1 for errors reported by the engine and 2 for usage
// errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace crosscut::api
