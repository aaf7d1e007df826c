#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mourrekit {

// Execution policy for the hot loops. Parallel runs fill independent slots
// and reduce serially afterwards, so results are identical to the serial
// reference bit for bit, regardless of thread count.
enum class Exec { Serial, Parallel };

inline int& thread_count() {
  static int n = 0;  // 0 = library default
  return n;
}

template <typename F>
void par_for(std::ptrdiff_t n, Exec policy, F&& body) {
  if (policy == Exec::Parallel) {
#ifdef _OPENMP
    if (thread_count() > 0) {
#pragma omp parallel for schedule(static) num_threads(thread_count())
      for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
      return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
#endif
  }
  for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
}

// Deterministic max-reduction: first index wins ties.
struct ArgMax {
  double value = -1.0;
  std::ptrdiff_t index = -1;
};

inline ArgMax arg_max(const std::vector<double>& v) {
  ArgMax m;
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(v.size()); ++i) {
    if (v[i] > m.value) {
      m.value = v[i];
      m.index = i;
    }
  }
  return m;
}

}  // namespace mourrekit
