#pragma once

#include <iosfwd>

#include "diamag/potentials.hpp"

namespace diamag {

// Symmetric gauge a(x) = (1/2)(-x2, x1, 0); identically zero for d = 1.
Eigen::Vector3d gauge_a(const Eigen::Vector3d& x, int dim);

// phi(x, y) = (1/2) e3 . (y ^ x); uses the first two coordinates only.
double magnetic_phase(const Eigen::Vector3d& x, const Eigen::Vector3d& y);

// H(b) = H0 + b H1 + b^2 H2, exact polynomial in b:
//   H0 = (1/2) p^2 + V          (3-point Dirichlet kinetic stencil)
//   H1 = -(1/2)(a.p + p.a) = i W with W real antisymmetric
//   H2 = (1/2) diag(a(x)^2)
// The central-difference momentum matrices D_l and the gauge diagonals a_l are
// kept so that covariant momenta and T-operators can be assembled on demand.
struct HamiltonianPolynomial {
  Grid grid;
  MatrixXd H0;                  // real symmetric
  MatrixXd W;                   // H1 = i W, real antisymmetric
  VectorXd h2;                  // diagonal of H2, >= 0
  std::array<MatrixXd, 2> D;    // central difference along axes 1, 2 (zero if absent)
  std::array<VectorXd, 2> a;    // gauge component diagonals a_1, a_2

  MatrixXcd assemble(double b) const;
  // dH/db = H1 + 2 b H2
  MatrixXcd h_prime(double b) const;
  // P_l(b) = i D_l + b diag(a_l), Hermitian; l is 1-based
  MatrixXcd covariant_momentum(int l, double b) const;

  long long size() const { return grid.nodes(); }
};

HamiltonianPolynomial build_hamiltonian(const Grid& grid, const PotentialField& field);

// coordinate-list sparse text export: "row col re im" per nonzero
void export_coo(const MatrixXcd& m, std::ostream& os, double drop_tol = 0.0);

}  // namespace diamag
