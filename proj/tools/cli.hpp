#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mixintent {

// Runs one command line (args[0] is the program name). Exit codes: 0 ok,
// 1 usage, 2 data or parse error, 3 training failure. `in` feeds predict
// when no input file is given.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace mixintent
