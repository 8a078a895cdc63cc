#pragma once

// Command pipelines behind the CLI: each command builds its systems from a
// RunConfig, writes its artifacts through an ArtifactWriter, and maps
// outcomes to exit codes (0 success, 1 verification failure, 2 input
// error).  Partial outputs are removed on failure.

#include <string>

#include "semiflow/config.hpp"

namespace semiflow {

struct RunResult {
    int exit_code = 0;
    std::string message;
    std::string output_dir;
};

RunResult run(const RunConfig& config);

// argv front end:  semiflow <command> [--config <file>]
// The SEMIFLOW_OUTPUT_ROOT environment variable prefixes relative output
// directories.
int run_cli(int argc, const char* const* argv);

} // namespace semiflow
