// Benchmark: serial reference path vs OpenMP workers on the three hot loops
// (contour-node resolvent sweeps, disorder-ensemble eigensolves, phase-chain
// triple contractions).  Prints one line per case with speedup.
#include <chrono>
#include <cstdio>
#include <functional>

#include "diamag/contour.hpp"
#include "diamag/experiments.hpp"
#include "diamag/parallel.hpp"
#include "diamag/response.hpp"

using namespace diamag;

namespace {

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Case {
  const char* name;
  std::function<double()> run;  // returns a checksum so work cannot be elided
};

void bench(const Case& c) {
  par::set_serial_reference(true);
  double t0 = now();
  double serial_sum = c.run();
  double t_serial = now() - t0;

  par::set_serial_reference(false);
  t0 = now();
  double par_sum = c.run();
  double t_par = now() - t0;

  std::printf("%-28s serial %8.3f s   parallel(%d) %8.3f s   speedup %5.2fx   %s\n", c.name,
              t_serial, par::threads(), t_par, t_serial / t_par,
              serial_sum == par_sum ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads = %d (set DIAMAG_THREADS to change)\n", par::threads());

  Grid g = make_grid(2, 8.0, 15);
  PotentialField f = sample_model(g, AlloyModel{}, 7);
  HamiltonianPolynomial hp = build_hamiltonian(g, f);
  ThermoParams tp;
  tp.beta = 1.0;
  tp.z = 0.3;
  Spectrum spec = eigensolve(hp.assemble(0.0));
  Contour contour =
      build_contour(default_contour_params(spec.e.minCoeff(), tp), spec.e.minCoeff(), tp);

  bench({"contour pressure sweep", [&] { return pressure_contour(hp, 0.0, tp, contour); }});

  Grid gs = make_grid(2, 6.0, 11);
  PotentialField fs = sample_model(gs, AlloyModel{}, 7);
  HamiltonianPolynomial hps = build_hamiltonian(gs, fs);
  Spectrum specs = eigensolve(hps.assemble(0.0));
  ContourParams cps = default_contour_params(specs.e.minCoeff(), tp);
  cps.nodes_per_segment = 16;
  Contour contour_s = build_contour(cps, specs.e.minCoeff(), tp);
  bench({"contour X1/X2 traces", [&] {
           XnTraces t = xn_traces_combined(hps, 0.3, tp, contour_s);
           return t.X1_exact + t.X2_exact + t.X1_kernel + t.X2_kernel;
         }});

  SweepPlan plan;
  plan.model = AlloyModel{};
  plan.dim = 2;
  plan.h = 1.0;
  plan.L_ladder = {8.0};
  plan.tp = tp;
  plan.realizations = 16;
  plan.base_seed = 1;
  plan.cross_check = false;
  bench({"ensemble eigensolves", [&] { return run_convergence_sweep(plan).per_L[0].mean_P; }});

  cplx xi(spec.e.minCoeff() - 1.0, 0.5);
  MatrixXcd R = resolvent(hp.assemble(0.3), xi);
  TOperators T = build_T_operators(hp, 0.3, xi, R);
  bench({"phase-chain contraction", [&] {
           cplx u = u2_trace_fast(g, R, T.T1);
           return u.real() + u.imag();
         }});
  return 0;
}
