#pragma once

#include "diamag/spectral.hpp"

namespace diamag {

// Statistics: eps = +1 Fermi, eps = -1 Bose.
struct ThermoParams {
  double beta = 1.0;
  double z = 0.5;
  int eps = +1;
  double qc_ratio = 1.0;  // the q/c prefactor of X_n

  void validate() const;
};

// Bose fugacity domain: z e^{-beta e_min} < 1 with an absolute margin.
void check_admissible(const ThermoParams& tp, double e_min);

// P_L = (eps / (beta |Lambda|)) sum_j ln(1 + eps z e^{-beta e_j})
double pressure_eigensum(const VectorXd& eigenvalues, const ThermoParams& tp, double volume);

// rho_L = (1 / |Lambda|) sum_j z e^{-beta e_j} / (1 + eps z e^{-beta e_j})
double density_eigensum(const VectorXd& eigenvalues, const ThermoParams& tp, double volume);

// X_n = (q/c)^n d^n P / d b^n by central differences with one Richardson step;
// each stencil point re-diagonalizes H(b) and re-checks admissibility.
double susceptibility_finite_difference(const HamiltonianPolynomial& hp, const ThermoParams& tp,
                                        double b, int n, double step = 0.0);

// X_2 by the exact second-derivative trace formula (Daleckii-Krein):
//   d^2P/db^2 = (eps/(beta|Lambda|)) [ Tr(g'(H) 2 H2)
//             + sum_{jk} |<j|H'(b)|k>|^2 (g'(e_j)-g'(e_k))/(e_j-e_k) ]
// with g(e) = ln(1+eps z e^{-beta e}) and the divided difference replaced by
// g'' on (near-)degenerate pairs.  One eigensolve, no finite differences.
double susceptibility_quadratic_response(const Spectrum& spec, const HamiltonianPolynomial& hp,
                                         const ThermoParams& tp, double b);

// X_1 = -(q/c)(1/|Lambda|) sum_j f_j <psi_j, (H1 + 2b H2) psi_j>.  Degenerate
// clusters (gap < 1e-8) are handled by the subspace trace, which is the
// derivative of the cluster eigenvalue sum.
double magnetization_hellmann_feynman(const Spectrum& spec, const HamiltonianPolynomial& hp,
                                      const ThermoParams& tp, double b);

}  // namespace diamag
