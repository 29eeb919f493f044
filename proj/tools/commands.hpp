#pragma once

#include <ostream>
#include <string>

#include "config.hpp"

namespace fedq::cli {

enum ExitCode { kPass = 0, kInvariantFailure = 1, kInputError = 2 };

// each command writes its report into cfg.output and returns an exit code;
// InputError and library errors are mapped by run_command
int cmd_geometry(const RunConfig& cfg, std::ostream& log);
int cmd_quantize(const RunConfig& cfg, std::ostream& log);
int cmd_einstein(const RunConfig& cfg, std::ostream& log);
int cmd_index(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const std::string& bundle_path, const Overrides& o, std::ostream& log);

// config loading, dispatch and error mapping
int run_command(const std::string& name, const std::string& config_path, const Overrides& o, std::ostream& log);

}  // namespace fedq::cli
