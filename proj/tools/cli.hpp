#pragma once

namespace timsrf::cli {

/// Runs the tim-srf command line. Returns 0 on success, 2 on input errors and
/// 3 on numerical failures.
int run(int argc, char** argv);

} // namespace timsrf::cli
