#pragma once

#include <iosfwd>

namespace cardnet::cli {

/// Entry point of the `cardnet` command. Returns 0 on success, 2 on usage
/// errors and 1 on any other failure, after printing a single line
/// "error: <kind>: <message>" to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cardnet::cli
