#include "diamag/spectral.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <vector>

namespace diamag {

Spectrum eigensolve(const MatrixXcd& H) {
  double herm_defect = (H - H.adjoint()).cwiseAbs().maxCoeff();
  double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if (herm_defect > 1e-12 * scale) {
    std::ostringstream msg;
    msg << "eigensolve: matrix not Hermitian (defect " << herm_defect << ")";
    throw Error(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
  if (es.info() != Eigen::Success) throw Error("eigensolve: iteration failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

void check_off_spectrum(const VectorXd& eigenvalues, cplx xi, double eta) {
  for (long long j = 0; j < eigenvalues.size(); ++j) {
    if (std::abs(cplx(eigenvalues[j], 0.0) - xi) < eta) {
      std::ostringstream msg;
      msg << "contour too close to spectrum: dist(xi = " << xi.real();
      if (xi.imag() != 0.0) msg << (xi.imag() > 0 ? "+" : "") << xi.imag() << "i";
      msg << ", e_" << j << " = " << eigenvalues[j] << ") < " << eta;
      throw Error(msg.str());
    }
  }
}

MatrixXcd resolvent(const MatrixXcd& H, cplx xi) {
  const long long n = H.rows();
  MatrixXcd A = H - xi * MatrixXcd::Identity(n, n);
  Eigen::PartialPivLU<MatrixXcd> lu(A);
  MatrixXcd R = lu.inverse();
  double resid = (A * R - MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (resid > 1e-8) throw Error("resolvent: solve residual too large; xi too close to spectrum?");
  return R;
}

MatrixXcd resolvent_b_derivative_oracle(const HamiltonianPolynomial& hp, double b, cplx xi,
                                        int n) {
  const long long N = hp.size();
  if (hp.grid.dim < 2) return MatrixXcd::Zero(N, N);
  if (n == 1) {
    const double delta = 1e-20;
    MatrixXcd A = hp.assemble(b) - xi * MatrixXcd::Identity(N, N);
    MatrixXcd B = delta * hp.h_prime(b);
    // second-imaginary-unit step: delta^2 correction to the primary block
    A -= (delta * delta) * hp.h2.asDiagonal().toDenseMatrix().cast<cplx>();
    MatrixXcd M(2 * N, 2 * N);
    M.topLeftCorner(N, N) = A;
    M.topRightCorner(N, N) = -B;
    M.bottomLeftCorner(N, N) = B;
    M.bottomRightCorner(N, N) = A;
    MatrixXcd rhs = MatrixXcd::Zero(2 * N, N);
    rhs.topLeftCorner(N, N) = MatrixXcd::Identity(N, N);
    MatrixXcd sol = Eigen::PartialPivLU<MatrixXcd>(M).solve(rhs);
    return sol.bottomLeftCorner(N, N) / delta;
  }
  if (n == 2) {
    auto R_at = [&](double bb) { return resolvent(hp.assemble(bb), xi); };
    MatrixXcd R0 = R_at(b);
    double s = 1e-3 * std::max(1.0, std::abs(b));
    auto second = [&](double step) -> MatrixXcd {
      return (R_at(b + step) - 2.0 * R0 + R_at(b - step)) / (step * step);
    };
    MatrixXcd d_full = second(s);
    MatrixXcd d_half = second(s / 2);
    return (4.0 * d_half - d_full) / 3.0;
  }
  throw Error("resolvent_b_derivative_oracle: n must be 1 or 2");
}

DecayFit fit_kernel_decay(const MatrixXcd& R, const Grid& g, cplx xi) {
  if (g.n_per_side < 12) throw Error("fit_kernel_decay: grid too small for a fit window");
  const double h = g.spacing();
  const double hd = std::pow(h, g.dim);
  const long long n = g.nodes();
  // precompute coordinates and boundary margins
  std::vector<Eigen::Vector3d> xs(n);
  std::vector<bool> interior(n);
  for (long long i = 0; i < n; ++i) {
    xs[i] = g.coord(i);
    interior[i] = g.depth(xs[i]) > 2.0 * h + 1e-12;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long long cnt = 0;
  double ss_res = 0;
  std::vector<std::pair<double, double>> pts;
  for (long long i = 0; i < n; ++i) {
    if (!interior[i]) continue;
    for (long long j = 0; j < n; ++j) {
      if (!interior[j]) continue;
      double dist = (xs[i] - xs[j]).norm();
      if (dist < 3.0 * h - 1e-12) continue;
      double mag = std::abs(R(i, j)) / hd * dist;
      if (mag <= 1e-290) continue;
      double lx = dist, ly = std::log(mag);
      pts.emplace_back(lx, ly);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++cnt;
    }
  }
  if (cnt < 8) throw Error("fit_kernel_decay: degenerate fit window");
  double denom = cnt * sxx - sx * sx;
  double slope = (cnt * sxy - sx * sy) / denom;
  double icept = (sy - slope * sx) / cnt;
  for (auto& [lx, ly] : pts) {
    double r = ly - (icept + slope * lx);
    ss_res += r * r;
  }
  DecayFit fit;
  fit.gamma = -slope;
  fit.prefactor = std::exp(icept);
  fit.residual = std::sqrt(ss_res / cnt);
  fit.xi = xi;
  fit.pairs = cnt;
  return fit;
}

void dump_kernel_csv(const MatrixXcd& R, const Grid& g, std::ostream& os) {
  // kernel normalization: matrix entry / h^d (converges to the continuum
  // kernel under refinement)
  const double hd = std::pow(g.spacing(), g.dim);
  os << "ix,iy,dist,re,im\n";
  for (long long i = 0; i < R.rows(); ++i)
    for (long long j = 0; j < R.cols(); ++j) {
      double dist = (g.coord(i) - g.coord(j)).norm();
      os << i << ',' << j << ',' << dist << ',' << R(i, j).real() / hd << ','
         << R(i, j).imag() / hd << '\n';
    }
}

}  // namespace diamag
