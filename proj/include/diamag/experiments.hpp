#pragma once

#include <cstdint>
#include <vector>

#include "diamag/contour.hpp"
#include "diamag/potentials.hpp"

namespace diamag {

// L-ladder sweep at fixed spacing h (thermodynamic limit at fixed physics);
// seeds for realization r are base_seed ^ r.
struct SweepPlan {
  PotentialModel model = ZeroModel{};
  int dim = 2;
  double h = 0.5;
  std::vector<double> L_ladder;
  double b = 0.0;
  ThermoParams tp;
  int realizations = 1;
  std::uint64_t base_seed = 1;
  bool cross_check = true;  // eigensum vs contour agreement gate per run
};

// grid with n_per_side = L/h - 1; rejects non-commensurate (L, h)
Grid grid_for(double L, double h, int dim);

struct SeedObservables {
  double P = 0, X1 = 0, X2 = 0;
};

struct LStats {
  double L = 0.0;
  int n_seeds = 0;
  double mean_P = 0, var_P = 0, se_P = 0;
  double mean_X1 = 0, var_X1 = 0, se_X1 = 0;
  double mean_X2 = 0, var_X2 = 0, se_X2 = 0;
  double max_abs_X1 = 0, max_abs_X2 = 0;
  std::vector<SeedObservables> raw;  // per-realization values, seed order
};

struct EnsembleStats {
  std::vector<LStats> per_L;
  // slope of log |m_P(L_{i+1}) - m_P(L_i)| against log L (successive means)
  double diff_decay_rate = 0.0;
  bool has_free_reference = false;
  double free_reference = 0.0;  // 1D band-integral pressure (Zero model, d=1)
};

// observables of one realization (shared eigensolves; cross-checked if asked)
SeedObservables observables_for_field(const PotentialField& field, double b,
                                      const ThermoParams& tp, bool cross_check);

EnsembleStats run_convergence_sweep(const SweepPlan& plan);

// requires >= 30 realizations; fills variances for the self-averaging test
EnsembleStats run_disorder_ensemble(const SweepPlan& plan);

// one-sided test of Var_2 < Var_1 at level alpha: s2^2/s1^2 against the
// F(n2-1, n1-1) distribution via the regularized incomplete beta function
bool variance_decrease_significant(double var1, int n1, double var2, int n2,
                                   double alpha = 0.05);
double f_distribution_cdf(double x, double d1, double d2);

// spatial (interior unit cells of one large box) vs ensemble (central cell
// over seeds) average of the local pressure density
struct ErgodicRecord {
  double spatial_mean = 0, spatial_se = 0;
  int n_cells = 0;
  double ensemble_mean = 0, ensemble_se = 0;
  int n_seeds = 0;
  double gap = 0, combined_se = 0;
  std::vector<double> cell_values;
};
ErgodicRecord run_ergodic_average(const PotentialModel& model, int dim, double big_L, double h,
                                  double window_w, double b, const ThermoParams& tp,
                                  int n_seeds, std::uint64_t base_seed);

// local pressure density per node: (eps/beta) sum_j ln(1+eps z e^{-beta e_j}) |psi_j(x)|^2 / h^d
VectorXd local_pressure_density(const Spectrum& spec, const Grid& grid, const ThermoParams& tp);

// nested-box resolvent comparison: diagonal kernel difference between each
// ladder box and the largest box, on shared interior nodes
struct BoundaryRecord {
  std::vector<double> Ls;         // small-box sides
  std::vector<double> integrals;  // (1/|Lambda|) integral of |diag difference|
  double fitted_exponent = 0.0;   // log-log slope, expected near -1
  std::vector<double> depths;     // kappa = m h for the largest small box
  std::vector<double> depth_max;  // max |diag difference| at that depth
  bool depth_monotone = false;
};
BoundaryRecord run_boundary_layer_probe(const PotentialModel& model, int dim,
                                        const std::vector<double>& L_ladder, double big_L,
                                        double h, double b, cplx xi, std::uint64_t seed);

// continuum Dirichlet Green function of -(1/2) d^2/dx^2 on (-L/2, L/2) at
// coincident points, for real xi < 0:  k = sqrt(-2 xi),
//   G(x,x) = 2 sinh(k(x+L/2)) sinh(k(L/2-x)) / (k sinh(kL))
double dirichlet_green_diag_1d(double L, double x, double xi_real);

// infinite-volume pressure of the free 1D lattice chain at spacing h:
//   P = (eps/beta) (1/pi) int_0^{pi/h} ln(1 + eps z e^{-beta (2/h^2) sin^2(kh/2)}) dk
double free_pressure_1d_band(double h, const ThermoParams& tp);

// least-squares slope of log y against log x (positive entries only)
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace diamag
