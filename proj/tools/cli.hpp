#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smms::cli {

enum class ExitCode : int { Pass = 0, Usage = 1, Fail = 2 };

/// Runs `smms <verify|classify|obata|oracle-compare|list> [flags]`.
/// Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smms::cli
