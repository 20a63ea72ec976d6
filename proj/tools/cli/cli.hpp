#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stylespace::cli {

/// One invocation of the `stylespace` tool. `args[0]` is the program name.
/// Returns 0 on success, 2 on usage errors and 1 on runtime errors; errors
/// are reported as a JSON object on `err`. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stylespace::cli
