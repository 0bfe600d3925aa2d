#pragma once

#include <vector>

#include "diamag/common.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

// OpenMP-parallel kernels with a serial reference path.  Every parallel loop
// in the project writes per-item results into caller-owned slots and reduces
// serially in index order, so threads=1 and threads=N produce identical bits.
namespace diamag::par {

// Worker count: explicit set_threads() > DIAMAG_THREADS env > 1.
int threads();
void set_threads(int n);

// Force the serial reference path regardless of the thread setting (used by
// tests and the benchmark to compare implementations).
void set_serial_reference(bool on);
bool serial_reference();

template <class F>
void run(long n, F&& fn) {
#ifdef _OPENMP
  if (!serial_reference() && threads() > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(threads())
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
#endif
  for (long i = 0; i < n; ++i) fn(i);
}

// Compensated (Kahan) sums, always evaluated in index order.
double sum_ordered(const std::vector<double>& v);
cplx sum_ordered(const std::vector<cplx>& v);

}  // namespace diamag::par
