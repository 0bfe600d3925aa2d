#pragma once

#include <vector>

#include "diamag/response.hpp"
#include "diamag/thermo.hpp"

namespace diamag {

// Gamma_K geometry: vertical line at E_K, flat segments at +- theta/(2 beta),
// rays from xi_K at half-angle sigma, truncated at Re xi = re_max.
struct ContourParams {
  double E_K = 0.0;
  double theta = 1.0;
  double xi_K = 0.0;
  double sigma = kPi / 4.0;
  double re_max = 0.0;
  int nodes_per_segment = 32;
  double panel_factor = 2.5;  // max panel length as a multiple of its clearance
};

ContourParams default_contour_params(double spectrum_floor, const ThermoParams& tp);

struct Contour {
  std::vector<cplx> xi;  // quadrature nodes (positively oriented)
  std::vector<cplx> w;   // dxi weights
  double eta = 0.0;      // min distance of nodes to [floor, inf)
  double tail = 0.0;     // analytic bound on the truncated ray tail of f_eps
  double spectrum_floor = 0.0;
  ContourParams params;
  ThermoParams tp;
};

// f_eps(beta, z; xi) = ln(1 + eps z e^{-beta xi})
cplx f_eps(const ThermoParams& tp, cplx xi);

// Builds and validates the contour: branch-point enclosure / cut crossing,
// spectrum clearance, fugacity-domain margin at every node, tail truncation.
Contour build_contour(const ContourParams& cp, double spectrum_floor, const ThermoParams& tp);

// Tr (H - xi)^{-1} for many xi: one Householder tridiagonalization, then the
// forward/backward continuant recurrences, O(N) per shift.  Independent of
// the eigensum route (no eigenvalues are computed).
class TridiagTrace {
 public:
  explicit TridiagTrace(const MatrixXcd& H);
  cplx trace_resolvent(cplx xi) const;

 private:
  VectorXd d_, e_;  // diagonal / subdiagonal of the unitary reduction
};

// P_L via the Dunford-Schwartz representation (contour route)
double pressure_contour(const HamiltonianPolynomial& hp, double b, const ThermoParams& tp,
                        const Contour& contour, double* imag_residual = nullptr);

enum class XnMode { Exact, Kernel };

// X_n by contour quadrature of resolvent-derivative traces: Exact uses the
// polynomial S-form of d^n R/db^n, Kernel the T-operator trace formulas.
double xn_trace_contour(const HamiltonianPolynomial& hp, double b, const ThermoParams& tp,
                        const Contour& contour, int n, XnMode mode,
                        double* imag_residual = nullptr);

// X1 and X2 in both modes from a single resolvent per contour node (the
// per-node LU dominates, so fusing the four quadratures is ~4x cheaper)
struct XnTraces {
  double X1_exact = 0, X2_exact = 0;
  double X1_kernel = 0, X2_kernel = 0;
  double imag_residual = 0;  // worst of the four
};
XnTraces xn_traces_combined(const HamiltonianPolynomial& hp, double b, const ThermoParams& tp,
                            const Contour& contour);

// CSV dump of the integrand trace along the contour (plot support)
void dump_contour_csv(const Contour& contour, std::ostream& os);

}  // namespace diamag
