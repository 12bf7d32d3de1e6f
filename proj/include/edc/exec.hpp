#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace edc {

// Execution policy for the data-parallel kernels. Serial is the reference
// path kept for testing; Par runs the identical loop body under OpenMP.
// Bodies only write to disjoint slots indexed by the loop variable, so the
// two policies produce bitwise-identical results for any thread count.
enum class Exec { Serial, Par };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <typename F>
void parallel_for(Exec policy, std::ptrdiff_t n, F&& body) {
  if (policy == Exec::Par) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
  }
}

}  // namespace edc
