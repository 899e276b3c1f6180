#pragma once

#include <string>

#include "noiseshape/config.hpp"

namespace noiseshape {

// Outcome of one CLI command. status follows the process exit convention:
// 0 success, 1 a verification check failed (the report names it). Usage and
// numeric problems are thrown as Error and mapped to 2 / 3 at the boundary.
struct RunResult {
    int status = 0;
    std::string report;   // human-readable, printed verbatim by the CLI
    std::string out_dir;  // run directory holding emitted files, may be empty
};

// command is one of: train, sample, erase, inject, pipeline, verify, sweep.
// Every run is reproducible from (command, cfg) alone; output files land in a
// content-addressed subdirectory of cfg "out" (default "runs") that is never
// reused, so prior runs are never overwritten.
RunResult run_command(const std::string& command, const Config& cfg);

const char* run_commands_help();  // one line per command, for usage text

}  // namespace noiseshape
