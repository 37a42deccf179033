#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace chroma_boltz::cli {

// Runs one command line (arguments after the program name). Results go to
// `out`, diagnostics to `err`. Returns the process exit code: 0 on success,
// 1 for usage errors, 2 parse, 3 validation, 4 numeric, 5 timeout.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chroma_boltz::cli
