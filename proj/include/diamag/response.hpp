#pragma once

#include <vector>

#include "diamag/spectral.hpp"

namespace diamag {

// Exact-on-lattice S-operators: S1 = (H1 + 2 b0 H2) R, S2 = H2 R.
struct SOperators {
  MatrixXcd S1, S2;
};
SOperators build_S_operators(const HamiltonianPolynomial& hp, double b0, const MatrixXcd& R);

// Kernel-form T-operators:
//   T1(x,y) = a(x-y) . [(i grad + b a(x)) R](x,y)  (Hadamard weights a_l(x-y))
//   T2(x,y) = (1/2) a^2(x-y) R(x,y)
// Both have exactly zero diagonal (a(0) = 0).
struct TOperators {
  MatrixXcd T1, T2;
};
TOperators build_T_operators(const HamiltonianPolynomial& hp, double b, cplx xi,
                             const MatrixXcd& R);

// max-norm deviation of T1 from the continuum product identity
// (i/2)(P1 R P2 - P2 R P1) R; decays with h, recorded for the h-ladder suite
double t1_product_identity_deviation(const HamiltonianPolynomial& hp, double b,
                                     const MatrixXcd& R, const TOperators& T);

// Prop.-2.1-type exact expansion: n=1: -R S1; n=2: 2 (R S1 S1 - R S2)
MatrixXcd derivative_expansion(const HamiltonianPolynomial& hp, double b0, cplx xi, int n);
MatrixXcd derivative_expansion(const HamiltonianPolynomial& hp, double b0, const MatrixXcd& R,
                               int n);

// phase matrix Phi(i,j) = phi(x_i, x_j)
MatrixXd phase_matrix(const Grid& grid);

// Phase-factorized kernel derivative (gauge form), returned as (1/n!) d^n R/db^n:
//   n=1: i phi . R  +  (-R T1)
//   n=2: (i phi)^2/2 . R  +  Tcal^1_1  +  (R T1 T1 - R T2)
MatrixXcd kernel_derivative_gauge_form(const HamiltonianPolynomial& hp, double b, cplx xi,
                                       int n);

// Expansion of R(b) around b0 with the phase factored out; remainder
// R(b) - [Rt + db Tt1 + db^2 Tt2] is O(db^3) in the continuum.
struct RemainderScan {
  std::vector<double> deltas;
  std::vector<double> norms;  // max-entry remainder norm per delta
  double slope = 0.0;         // log-log fitted order
};
RemainderScan taylor_remainder_scan(const HamiltonianPolynomial& hp, double b0, cplx xi,
                                    const std::vector<double>& deltas);

// trace of the phase-weighted triple contraction U2 (third susceptibility);
// the fast form factorizes the trilinear phase into coordinate-diagonal
// chains, the direct form keeps the explicit weight array (reference)
cplx u2_trace_fast(const Grid& grid, const MatrixXcd& R, const MatrixXcd& T1);
cplx u2_trace_direct(const Grid& grid, const MatrixXcd& R, const MatrixXcd& T1);

}  // namespace diamag
