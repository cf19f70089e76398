#include "shapegrad/parallel.hpp"

#include <cstdlib>
#include <string>

namespace shapegrad::par {

int configure_from_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("SHAPEGRAD_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) omp_set_num_threads(std::min(cap, omp_get_max_threads()));
    } catch (...) {
      // ignore malformed values; keep the OpenMP default
    }
  }
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace shapegrad::par
