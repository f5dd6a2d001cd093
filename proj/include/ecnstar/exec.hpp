#pragma once

namespace ecnstar {

/// Execution policy for the data-parallel kernels. Serial is the reference
/// implementation; Parallel uses OpenMP when compiled in and must produce
/// bit-identical results.
enum class Exec {
    Serial,
    Parallel,
};

} // namespace ecnstar
