// Command-line driver. Subcommands: info, scan, claim, prove, multiletter.
// Exit codes: 0 pass, 2 parse/config error, 3 resource cap / empty result /
// LP numerical failure, 4 claim falsified, 5 target not Shannon-provable.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bcbound {

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace bcbound
