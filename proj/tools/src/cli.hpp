#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sgwr::cli {

/// Runs one `sgwr` invocation. args excludes the program name.
/// Returns 0 on success, 1 when a stage fails, 2 on usage errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sgwr::cli
