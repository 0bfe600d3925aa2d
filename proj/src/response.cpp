#include "diamag/response.hpp"

#include <cmath>

namespace diamag {

namespace {
constexpr long long kKernelNodeGuard = 1600;  // full phase-kernel memory guard

void guard_nodes(const Grid& g, const char* what) {
  if (g.nodes() > kKernelNodeGuard) throw Error(std::string(what) + ": grid exceeds kernel node guard");
}
}  // namespace

SOperators build_S_operators(const HamiltonianPolynomial& hp, double b0, const MatrixXcd& R) {
  SOperators s;
  s.S1 = hp.h_prime(b0) * R;
  s.S2 = hp.h2.asDiagonal().toDenseMatrix().cast<cplx>() * R;
  return s;
}

TOperators build_T_operators(const HamiltonianPolynomial& hp, double b, cplx /*xi*/,
                             const MatrixXcd& R) {
  const Grid& g = hp.grid;
  const long long n = g.nodes();
  TOperators t;
  t.T1 = MatrixXcd::Zero(n, n);
  t.T2 = MatrixXcd::Zero(n, n);
  if (g.dim < 2) return t;
  MatrixXcd M1 = hp.covariant_momentum(1, b) * R;
  MatrixXcd M2 = hp.covariant_momentum(2, b) * R;
  for (long long i = 0; i < n; ++i) {
    Eigen::Vector3d xi_ = g.coord(i);
    for (long long j = 0; j < n; ++j) {
      Eigen::Vector3d d = xi_ - g.coord(j);
      // a(x - y) = (1/2)(-(x2 - y2), x1 - y1)
      double a1 = -0.5 * d[1], a2 = 0.5 * d[0];
      t.T1(i, j) = a1 * M1(i, j) + a2 * M2(i, j);
      t.T2(i, j) = 0.5 * (a1 * a1 + a2 * a2) * R(i, j);
    }
  }
  return t;
}

double t1_product_identity_deviation(const HamiltonianPolynomial& hp, double b,
                                     const MatrixXcd& R, const TOperators& T) {
  if (hp.grid.dim < 2) return 0.0;
  MatrixXcd P1 = hp.covariant_momentum(1, b);
  MatrixXcd P2 = hp.covariant_momentum(2, b);
  MatrixXcd C = cplx(0.0, 0.5) * (P1 * R * P2 - P2 * R * P1) * R;
  return (T.T1 - C).cwiseAbs().maxCoeff();
}

MatrixXcd derivative_expansion(const HamiltonianPolynomial& hp, double b0, const MatrixXcd& R,
                               int n) {
  SOperators s = build_S_operators(hp, b0, R);
  if (n == 1) return -R * s.S1;
  if (n == 2) return 2.0 * (R * s.S1 * s.S1 - R * s.S2);
  if (n == 3) {
    MatrixXcd rs1 = R * s.S1;
    return 6.0 * (rs1 * s.S2 + R * s.S2 * s.S1 - rs1 * s.S1 * s.S1);
  }
  throw Error("derivative_expansion: n must be 1, 2 or 3");
}

MatrixXcd derivative_expansion(const HamiltonianPolynomial& hp, double b0, cplx xi, int n) {
  return derivative_expansion(hp, b0, resolvent(hp.assemble(b0), xi), n);
}

MatrixXd phase_matrix(const Grid& g) {
  const long long n = g.nodes();
  MatrixXd phi(n, n);
  for (long long i = 0; i < n; ++i)
    for (long long j = 0; j < n; ++j) phi(i, j) = magnetic_phase(g.coord(i), g.coord(j));
  return phi;
}

MatrixXcd kernel_derivative_gauge_form(const HamiltonianPolynomial& hp, double b, cplx xi,
                                       int n) {
  guard_nodes(hp.grid, "kernel_derivative_gauge_form");
  const long long N = hp.size();
  if (hp.grid.dim < 2) return MatrixXcd::Zero(N, N);
  MatrixXcd R = resolvent(hp.assemble(b), xi);
  TOperators T = build_T_operators(hp, b, xi, R);
  MatrixXd phi = phase_matrix(hp.grid);
  MatrixXcd iphi = cplx(0.0, 1.0) * phi.cast<cplx>();
  if (n == 1) return iphi.cwiseProduct(R) - R * T.T1;
  if (n == 2) {
    MatrixXcd phase_term = 0.5 * iphi.cwiseProduct(iphi).cwiseProduct(R);
    // Tcal^1_1 = -R (iphi . T1) + ((-iphi) . R) T1
    MatrixXcd tcal11 = -R * iphi.cwiseProduct(T.T1) + (-iphi).cwiseProduct(R) * T.T1;
    MatrixXcd tcal02 = R * T.T1 * T.T1 - R * T.T2;
    return phase_term + tcal11 + tcal02;
  }
  throw Error("kernel_derivative_gauge_form: n must be 1 or 2");
}

RemainderScan taylor_remainder_scan(const HamiltonianPolynomial& hp, double b0, cplx xi,
                                    const std::vector<double>& deltas) {
  if (deltas.size() < 2) throw Error("taylor_remainder_scan: ladder too short for a slope fit");
  guard_nodes(hp.grid, "taylor_remainder_scan");
  RemainderScan scan;
  scan.deltas = deltas;
  MatrixXcd R0 = resolvent(hp.assemble(b0), xi);
  TOperators T = build_T_operators(hp, b0, xi, R0);
  MatrixXd phi = phase_matrix(hp.grid);
  const long long n = hp.size();
  for (double db : deltas) {
    if (db == 0.0) {
      scan.norms.push_back(0.0);
      continue;
    }
    MatrixXcd phase(n, n);
    for (long long i = 0; i < n; ++i)
      for (long long j = 0; j < n; ++j)
        phase(i, j) = std::exp(cplx(0.0, db * phi(i, j)));
    MatrixXcd Rt = phase.cwiseProduct(R0);
    MatrixXcd Tt1 = phase.cwiseProduct(T.T1);
    MatrixXcd Tt2 = phase.cwiseProduct(T.T2);
    MatrixXcd approx = Rt - db * (Rt * Tt1) + (db * db) * (Rt * (Tt1 * Tt1 - Tt2));
    MatrixXcd Rb = resolvent(hp.assemble(b0 + db), xi);
    scan.norms.push_back((Rb - approx).cwiseAbs().maxCoeff());
  }
  // log-log slope over the nonzero deltas
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i] == 0.0 || scan.norms[i] <= 0.0) continue;
    double lx = std::log(std::abs(deltas[i])), ly = std::log(scan.norms[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  if (cnt >= 2) scan.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  return scan;
}

cplx u2_trace_fast(const Grid& g, const MatrixXcd& R, const MatrixXcd& T1) {
  const long long n = g.nodes();
  VectorXd x1(n), x2(n);
  for (long long i = 0; i < n; ++i) {
    Eigen::Vector3d x = g.coord(i);
    x1[i] = x[0];
    x2[i] = x[1];
  }
  MatrixXcd G = T1 * T1;
  MatrixXcd K1 = T1 * x1.asDiagonal() * T1;
  MatrixXcd K2 = T1 * x2.asDiagonal() * T1;
  auto trace_dRdM = [&](const VectorXd& left, const VectorXd& mid, const MatrixXcd& M) {
    // Tr(diag(left) R diag(mid) M)
    cplx s = 0.0;
    for (long long i = 0; i < n; ++i)
      for (long long j = 0; j < n; ++j) s += left[i] * R(i, j) * mid[j] * M(j, i);
    return s;
  };
  VectorXd ones = VectorXd::Ones(n);
  // phi(x,z1):   (1/2)[x2 z1_1 - x1 z1_2]
  cplx t1 = 0.5 * (trace_dRdM(x2, x1, G) - trace_dRdM(x1, x2, G));
  // phi(z1,z2):  (1/2)[z1_2 z2_1 - z1_1 z2_2]
  cplx t2 = 0.5 * (trace_dRdM(ones, x2, K1) - trace_dRdM(ones, x1, K2));
  // phi(z2,x):   (1/2)[x1 z2_2 - x2 z2_1]
  cplx t3 = 0.5 * (trace_dRdM(x1, ones, K2) - trace_dRdM(x2, ones, K1));
  return cplx(0.0, 1.0) * (t1 + t2 + t3);
}

cplx u2_trace_direct(const Grid& g, const MatrixXcd& R, const MatrixXcd& T1) {
  guard_nodes(g, "u2_trace_direct");
  const long long n = g.nodes();
  std::vector<Eigen::Vector3d> xs(n);
  for (long long i = 0; i < n; ++i) xs[i] = g.coord(i);
  cplx s = 0.0;
  for (long long x = 0; x < n; ++x)
    for (long long z1 = 0; z1 < n; ++z1) {
      if (R(x, z1) == cplx(0.0)) continue;
      for (long long z2 = 0; z2 < n; ++z2) {
        double w = magnetic_phase(xs[x], xs[z1]) + magnetic_phase(xs[z1], xs[z2]) +
                   magnetic_phase(xs[z2], xs[x]);
        s += cplx(0.0, w) * R(x, z1) * T1(z1, z2) * T1(z2, x);
      }
    }
  return s;
}

}  // namespace diamag
