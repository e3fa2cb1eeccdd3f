#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hodet/config.hpp"

namespace hodet::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

int cmd_generate(const RunConfig& cfg, std::ostream& out);
int cmd_train(const RunConfig& cfg, std::ostream& out);
int cmd_eval(const RunConfig& cfg, std::ostream& out);
int cmd_trace(const RunConfig& cfg, std::ostream& out);

// Parses `args` (without the program name), dispatches the subcommand and maps
// exceptions onto exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hodet::cli
