#pragma once

#include <cstdint>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace sclc {

/// Execution policy for the data-parallel kernels (frequency grids, sine
/// dwells, probe batches). Serial is the reference path; Parallel uses
/// OpenMP when compiled in. Both produce identical results: every kernel
/// writes to preallocated per-index slots and reductions run serially.
enum class ExecPolicy { Serial, Parallel };

template <typename Body>
void parallel_for(std::int64_t count, ExecPolicy policy, const Body& body) {
#if defined(_OPENMP)
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
#else
  (void)policy;
#endif
  for (std::int64_t i = 0; i < count; ++i) body(i);
}

inline int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace sclc
