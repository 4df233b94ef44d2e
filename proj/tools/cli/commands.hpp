#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace bbabc::cli {

CountTable load_table(const RunConfig& config);

// Each command writes its report directory under config.out and returns an
// exit code; verdict failures return kVerdictFailure.
int cmd_plugin(const RunConfig& config, std::ostream& log);
int cmd_abc(const RunConfig& config, std::ostream& log);
int cmd_validate_datagen(const RunConfig& config, std::ostream& log);
int cmd_verify_recovery(const RunConfig& config, std::ostream& log);
int cmd_partition(const RunConfig& config, std::ostream& log);

// Parses arguments, dispatches and maps exceptions to exit codes.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bbabc::cli
