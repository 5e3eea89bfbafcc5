#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowbot {

/// Runs one flowbot subcommand. `args` excludes the program name. Reports go
/// to `out`, diagnostics to `err`. Returns 0 on success, 2 on a usage error,
/// 1 on a runtime error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flowbot
