#pragma once

#include <string>
#include <vector>

namespace pnmf::cli {

/// Entry point shared by the binary and in-process tests. args excludes the
/// program name. Returns the process exit code: 0 success, 1 validation or
/// check failure, 2 I/O, parse, or usage error.
int run(const std::vector<std::string>& args);

} // namespace pnmf::cli
