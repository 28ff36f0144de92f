#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace brw {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitNumerical = 3 };

/// Subcommands accepted by dispatch, in help order.
const std::vector<std::string>& subcommand_names();

/// Runs `brw_spectra <subcommand> [options]`. args excludes the program name.
/// Results go to --out (default `out`), diagnostics to `err`. A run manifest is
/// written to --manifest, to <out>.manifest.json when --out is a file, or to
/// `err` otherwise.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const char* tool_version();

}  // namespace brw
