#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hglue::cli {

/// Entry point of the hitchin_glue command. Returns the process exit code:
/// 0 success, 2 bad arguments or input, 3 numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "2:10:2" (inclusive) or "1,2,4,8". Throws ParseError unless the values
/// are positive and strictly increasing.
std::vector<double> parse_t_range(const std::string& text);

}  // namespace hglue::cli
