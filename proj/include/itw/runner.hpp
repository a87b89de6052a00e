#pragma once

#include <string>

#include "itw/config.hpp"

namespace itw {

/// Outcome of one batch run: the rendered table and the process exit code
/// (0 only when every tolerance declared for the run held).
struct RunResult {
    int exit_code = 0;
    std::string output;
    std::string out_path;  // file the output was written to, empty for stdout
    std::string warning;   // non-fatal notes (e.g. conversion was a no-op)
};

/// Executes a config: verify emits one row per seed, converge emits the
/// level table, convert emits the drift/field-drift audit trail of the
/// representation change, list-scenarios emits the catalog. The rendered
/// text is returned and, when config.out_path is set, also written there.
RunResult run(const RunConfig& config);

}  // namespace itw
