#ifndef ENTANGLE_CLI_HPP
#define ENTANGLE_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace entangle {

/// Runs the `entangle` command line. `args` excludes the program name.
/// Returns 0 on success and 1 on any usage, I/O or validation failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace entangle

#endif // ENTANGLE_CLI_HPP
