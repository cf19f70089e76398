#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace shapegrad::par {

// Reads SHAPEGRAD_THREADS and caps the OpenMP thread pool accordingly.
// Returns the resulting thread count.
int configure_from_env();

int max_threads();

// Block size for deterministic reductions. Partial sums are formed per fixed
// block and combined in ascending block order, so results are bit-identical
// for any thread count.
inline constexpr std::size_t kReduceBlock = 1024;

// Loops below this size run serially; thread-team startup costs more than the
// work. Results are identical either way (fixed blocking).
inline constexpr std::size_t kSerialCutoff = 2048;

template <class TermFn>
double block_sum(std::size_t n, TermFn&& term) {
  if (n == 0) return 0.0;
  const std::size_t nb = (n + kReduceBlock - 1) / kReduceBlock;
  if (nb == 1 || n < kSerialCutoff) {
    // Same blocked combination order as the parallel path.
    double total = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const std::size_t lo = b * kReduceBlock;
      const std::size_t hi = std::min(n, lo + kReduceBlock);
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += term(i);
      total += s;
    }
    return total;
  }
  std::vector<double> partial(nb, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long b = 0; b < static_cast<long long>(nb); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t hi = std::min(n, lo + kReduceBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (std::size_t b = 0; b < nb; ++b) s += partial[b];
  return s;
}

template <class BodyFn>
void parallel_for(std::size_t n, BodyFn&& body) {
  if (n < kSerialCutoff) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    body(static_cast<std::size_t>(i));
  }
}

}  // namespace shapegrad::par
