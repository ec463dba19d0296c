#include "lidskii/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lidskii {

void apply_thread_cap_from_env() {
#ifdef _OPENMP
  const char* s = std::getenv("LIDSKII_EVOLVE_THREADS");
  if (!s) return;
  try {
    const int n = std::stoi(s);
    if (n > 0) omp_set_num_threads(n);
  } catch (...) {
    // Ignore malformed values; the OpenMP default stays in effect.
  }
#endif
}

int active_thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace lidskii
