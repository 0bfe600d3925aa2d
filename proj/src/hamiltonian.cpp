#include "diamag/hamiltonian.hpp"

#include <ostream>

namespace diamag {

Eigen::Vector3d gauge_a(const Eigen::Vector3d& x, int dim) {
  if (dim < 2) return Eigen::Vector3d::Zero();
  return {-0.5 * x[1], 0.5 * x[0], 0.0};
}

double magnetic_phase(const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
  return 0.5 * (y[0] * x[1] - y[1] * x[0]);
}

HamiltonianPolynomial build_hamiltonian(const Grid& grid, const PotentialField& field) {
  if (field.grid.dim != grid.dim || field.grid.n_per_side != grid.n_per_side ||
      field.grid.side != grid.side)
    throw Error("build_hamiltonian: field grid does not match");
  const long long n = grid.nodes();
  const double h = grid.spacing();
  const double inv_h2 = 1.0 / (h * h);

  HamiltonianPolynomial hp{grid,
                           MatrixXd::Zero(n, n),
                           MatrixXd(),
                           VectorXd::Zero(n),
                           {MatrixXd(), MatrixXd()},
                           {VectorXd(), VectorXd()}};

  // kinetic part: 3-point Dirichlet Laplacian per axis, H0 = (1/2)(-lap) + V
  for (long long i = 0; i < n; ++i) {
    hp.H0(i, i) = grid.dim * inv_h2 + field.values[i];
    auto m = grid.unflatten(i);
    for (int a = 0; a < grid.dim; ++a) {
      if (m[a] + 1 < grid.n_per_side) {
        auto mm = m;
        ++mm[a];
        hp.H0(i, grid.flatten(mm)) = -0.5 * inv_h2;
        hp.H0(grid.flatten(mm), i) = -0.5 * inv_h2;
      }
    }
  }

  if (grid.dim >= 2) {
    for (int l = 0; l < 2; ++l) {
      hp.D[l] = MatrixXd::Zero(n, n);
      hp.a[l] = VectorXd::Zero(n);
    }
    for (long long i = 0; i < n; ++i) {
      auto m = grid.unflatten(i);
      Eigen::Vector3d x = grid.coord(m);
      Eigen::Vector3d av = gauge_a(x, grid.dim);
      for (int l = 0; l < 2; ++l) {
        hp.a[l][i] = av[l];
        if (m[l] + 1 < grid.n_per_side) {
          auto mm = m;
          ++mm[l];
          long long j = grid.flatten(mm);
          hp.D[l](i, j) = 0.5 / h;   // forward neighbor
          hp.D[l](j, i) = -0.5 / h;  // backward neighbor as seen from j
        }
      }
    }
    // H1 = -(1/2)(a.p + p.a) with p_l = -i D_l  =>  H1 = (i/2)(a_l D_l + D_l a_l)
    hp.W = MatrixXd::Zero(n, n);
    for (int l = 0; l < 2; ++l)
      hp.W += 0.5 * (hp.a[l].asDiagonal() * hp.D[l] + hp.D[l] * hp.a[l].asDiagonal());
    for (long long i = 0; i < n; ++i) {
      double a2 = hp.a[0][i] * hp.a[0][i] + hp.a[1][i] * hp.a[1][i];
      hp.h2[i] = 0.5 * a2;
    }
  } else {
    hp.W = MatrixXd::Zero(n, n);
  }
  return hp;
}

MatrixXcd HamiltonianPolynomial::assemble(double b) const {
  MatrixXcd m = H0.cast<cplx>();
  if (b != 0.0 && grid.dim >= 2) {
    m += cplx(0.0, b) * W.cast<cplx>();
    m += (b * b) * h2.asDiagonal().toDenseMatrix().cast<cplx>();
  }
  return m;
}

MatrixXcd HamiltonianPolynomial::h_prime(double b) const {
  const long long n = size();
  MatrixXcd m = MatrixXcd::Zero(n, n);
  if (grid.dim < 2) return m;
  m = cplx(0.0, 1.0) * W.cast<cplx>();
  m += (2.0 * b) * h2.asDiagonal().toDenseMatrix().cast<cplx>();
  return m;
}

MatrixXcd HamiltonianPolynomial::covariant_momentum(int l, double b) const {
  if (l < 1 || l > grid.dim) throw Error("covariant_momentum: invalid axis");
  const long long n = size();
  if (grid.dim < 2) {
    // d = 1: no gauge; still provide i d/dx for completeness
    MatrixXcd m = MatrixXcd::Zero(n, n);
    const double h = grid.spacing();
    for (long long i = 0; i + 1 < n; ++i) {
      m(i, i + 1) = cplx(0.0, 0.5 / h);
      m(i + 1, i) = cplx(0.0, -0.5 / h);
    }
    return m;
  }
  MatrixXcd m = cplx(0.0, 1.0) * D[l - 1].cast<cplx>();
  if (b != 0.0) m += b * a[l - 1].asDiagonal().toDenseMatrix().cast<cplx>();
  return m;
}

void export_coo(const MatrixXcd& m, std::ostream& os, double drop_tol) {
  os << "# row col re im  (0-based, dense entries with |v| > " << drop_tol << ")\n";
  for (long long i = 0; i < m.rows(); ++i)
    for (long long j = 0; j < m.cols(); ++j)
      if (std::abs(m(i, j)) > drop_tol)
        os << i << ' ' << j << ' ' << m(i, j).real() << ' ' << m(i, j).imag() << '\n';
}

}  // namespace diamag
