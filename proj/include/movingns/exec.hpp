#pragma once

namespace movingns {

/// Kernel execution policy. Serial is the reference implementation: it must
/// produce bitwise-identical results to the OpenMP path (each output entry
/// is reduced in a fixed order by exactly one thread).
enum class ExecPolicy { serial, openmp };

}  // namespace movingns
