#pragma once

#include "diamag/hamiltonian.hpp"

namespace diamag {

struct Spectrum {
  VectorXd e;     // ascending eigenvalues
  MatrixXcd psi;  // orthonormal eigenvector columns
};

// Dense Hermitian eigendecomposition; rejects visibly non-Hermitian input.
Spectrum eigensolve(const MatrixXcd& H);

// (H - xi)^{-1} by partial-pivot LU.  When eigenvalues are supplied the
// distance condition dist(xi, spec) >= eta is enforced with a named offender.
MatrixXcd resolvent(const MatrixXcd& H, cplx xi);
void check_off_spectrum(const VectorXd& eigenvalues, cplx xi, double eta);

// dR/db (n=1) via a complex-step in a second, independent imaginary unit:
// solve [[A, -B], [B, A]] [X; Y] = [I; 0] with A = H(b) - xi, B = delta*H'(b),
// and dR/db = Y/delta.  No subtractive cancellation, machine-precision result.
// n=2 uses central second differences of exact resolvents with one Richardson
// extrapolation step.
MatrixXcd resolvent_b_derivative_oracle(const HamiltonianPolynomial& hp, double b, cplx xi,
                                        int n);

struct DecayFit {
  double gamma = 0.0;      // fitted decay rate
  double prefactor = 0.0;  // exp(intercept)
  double residual = 0.0;   // rms residual of the log fit
  cplx xi;
  long long pairs = 0;
};

// Least-squares fit of log(|R^(1)(x,y)| |x-y|) ~ c - gamma |x-y| over interior
// pairs with |x-y| >= 3h, excluding nodes within 2h of the boundary.
DecayFit fit_kernel_decay(const MatrixXcd& R, const Grid& grid, cplx xi);

// CSV kernel dump: ix, iy, |x-y|, Re, Im (kernel = matrix / h^d)
void dump_kernel_csv(const MatrixXcd& R, const Grid& grid, std::ostream& os);

}  // namespace diamag
