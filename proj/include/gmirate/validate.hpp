#ifndef GMIRATE_VALIDATE_HPP
#define GMIRATE_VALIDATE_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace gmirate {

// One validation check: `measured` against `bound` with direction encoded
// in the check itself; `detail` carries the measured values for the report.
struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
    std::string detail;
};

struct CheckOptions {
    std::uint64_t master_seed = 20260809;
    // Path of the CLI binary for the cross-process determinism check; when
    // empty the check varies the OpenMP thread count in-process instead.
    std::string cli_path;
    std::vector<std::string> subset;  // empty = run everything
    bool extras = true;               // include the cheap module invariants
};

std::vector<CheckResult> run_validation_checks(const CheckOptions& opts);

}  // namespace gmirate

#endif
