#pragma once

#include <iosfwd>

namespace propgraph {

/// `propgraph index|query|eval|stats ...`. Returns 0 on success, 2 on a usage
/// error and 1 on any other failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace propgraph
