#include "diamag/parallel.hpp"

#include <cstdlib>

namespace diamag::par {

namespace {
int g_threads = 0;  // 0 = not resolved yet
bool g_serial_ref = false;

int resolve_default() {
  if (const char* env = std::getenv("DIAMAG_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}
}  // namespace

int threads() {
  if (g_threads == 0) g_threads = resolve_default();
  return g_threads;
}

void set_threads(int n) { g_threads = n >= 1 ? n : 1; }

void set_serial_reference(bool on) { g_serial_ref = on; }
bool serial_reference() { return g_serial_ref; }

double sum_ordered(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

cplx sum_ordered(const std::vector<cplx>& v) {
  cplx s = 0.0, c = 0.0;
  for (cplx x : v) {
    cplx y = x - c;
    cplx t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

}  // namespace diamag::par
