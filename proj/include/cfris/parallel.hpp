#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfris {

// Execution policy for data-parallel loops. `serial` is the reference path;
// every kernel must produce bit-identical results under both policies, which
// holds as long as loop bodies write disjoint slots and reductions are
// performed in index order afterwards.
enum class Exec { serial, openmp };

inline int hardware_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

template <typename Fn>
void parallel_for(Exec exec, std::int64_t n, Fn&& fn) {
#ifdef _OPENMP
  if (exec == Exec::openmp && n > 1) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
#else
  (void)exec;
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    fn(i);
  }
}

}  // namespace cfris
