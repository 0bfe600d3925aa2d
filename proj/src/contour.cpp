#include "diamag/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "diamag/parallel.hpp"

namespace diamag {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = -t;
    x[n - 1 - i] = t;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

struct Cut {
  double x_c;  // half-line {Re <= x_c, Im = y}
  double y;
  int m;  // branch index, for diagnostics
};

// logarithmic branch points of f_eps: xi = beta^{-1} ln z + i pi (2m+1)/beta
// (Fermi) or + 2 pi i m / beta (Bose); each carries a cut running left.
std::vector<Cut> branch_cuts(const ThermoParams& tp, double im_max) {
  std::vector<Cut> cuts;
  const double x_c = std::log(tp.z) / tp.beta;
  const double span = im_max + 2.0 * kPi / tp.beta;
  if (tp.eps == +1) {
    for (int m = 0;; ++m) {
      double y = (2 * m + 1) * kPi / tp.beta;
      if (y > span) break;
      cuts.push_back({x_c, y, m});
      cuts.push_back({x_c, -y, -m - 1});
    }
  } else {
    cuts.push_back({x_c, 0.0, 0});
    for (int m = 1;; ++m) {
      double y = 2 * m * kPi / tp.beta;
      if (y > span) break;
      cuts.push_back({x_c, y, m});
      cuts.push_back({x_c, -y, -m});
    }
  }
  return cuts;
}

double dist_to_spectrum(cplx p, double floor) {
  if (p.real() >= floor) return std::abs(p.imag());
  return std::abs(p - cplx(floor, 0.0));
}

double dist_to_cut(cplx p, const Cut& c) {
  if (p.real() <= c.x_c) return std::abs(p.imag() - c.y);
  return std::hypot(p.real() - c.x_c, p.imag() - c.y);
}

double clearance_at(cplx p, double floor, const std::vector<Cut>& cuts) {
  double d = dist_to_spectrum(p, floor);
  for (const Cut& c : cuts) d = std::min(d, dist_to_cut(p, c));
  return d;
}

// straight segments as endpoint pairs; panels are emitted by bisection until
// each panel is short relative to its distance from the singular set
struct Segment {
  cplx z0, z1;
};

void panelize(const Segment& s, double floor, const std::vector<Cut>& cuts, double factor,
              int depth, std::vector<Segment>& out) {
  double len = std::abs(s.z1 - s.z0);
  double clear = std::numeric_limits<double>::max();
  for (double t : {0.0, 0.25, 0.5, 0.75, 1.0})
    clear = std::min(clear, clearance_at(s.z0 + t * (s.z1 - s.z0), floor, cuts));
  if (len > factor * clear && depth < 16) {
    cplx mid = 0.5 * (s.z0 + s.z1);
    panelize({s.z0, mid}, floor, cuts, factor, depth + 1, out);
    panelize({mid, s.z1}, floor, cuts, factor, depth + 1, out);
    return;
  }
  out.push_back(s);
}

void reject_cut_crossing(const Segment& s, const Cut& c, const ThermoParams& tp) {
  const double tol = 1e-12;
  auto fail = [&] {
    std::ostringstream msg;
    msg << "contour crosses the branch cut through beta^{-1} ln z + ";
    if (tp.eps == +1)
      msg << "i pi (2m+1)/beta with m = " << c.m;
    else
      msg << "2 pi i m / beta with m = " << c.m;
    msg << " (branch point at " << c.x_c << " + " << c.y << "i)";
    throw Error(msg.str());
  };
  double dy = s.z1.imag() - s.z0.imag();
  if (std::abs(dy) < tol) {
    if (std::abs(s.z0.imag() - c.y) < tol &&
        std::min(s.z0.real(), s.z1.real()) <= c.x_c + tol)
      fail();
    return;
  }
  double t = (c.y - s.z0.imag()) / dy;
  if (t < -tol || t > 1.0 + tol) return;
  double x = s.z0.real() + t * (s.z1.real() - s.z0.real());
  if (x <= c.x_c + tol) fail();
}

}  // namespace

ContourParams default_contour_params(double spectrum_floor, const ThermoParams& tp) {
  tp.validate();
  ContourParams cp;
  cp.xi_K = spectrum_floor + 1.0;
  cp.E_K = spectrum_floor - 1.0;
  if (tp.eps == -1) {
    // keep the vertical line to the right of the real Bose branch point
    double x_c = std::log(tp.z) / tp.beta;
    if (cp.E_K <= x_c + 0.1) cp.E_K = 0.5 * (x_c + spectrum_floor);
  }
  cp.theta = 1.0;
  cp.sigma = kPi / 4.0;
  cp.re_max = cp.xi_K + 45.0 / tp.beta;
  return cp;
}

cplx f_eps(const ThermoParams& tp, cplx xi) {
  return std::log(1.0 + static_cast<double>(tp.eps) * tp.z * std::exp(-tp.beta * xi));
}

Contour build_contour(const ContourParams& cp, double spectrum_floor, const ThermoParams& tp) {
  tp.validate();
  if (!(cp.sigma > 0.0 && cp.sigma < kPi / 2.0))
    throw Error("contour: ray half-angle sigma must lie in (0, pi/2)");
  if (!(cp.theta > 0.0)) throw Error("contour: theta must be positive");
  if (cp.nodes_per_segment < 2) throw Error("contour: need at least 2 nodes per panel");
  if (!(cp.E_K < spectrum_floor - 1e-3))
    throw Error("contour touches spectrum: E_K must sit below the spectral floor by a margin");
  if (!(cp.xi_K > cp.E_K)) throw Error("contour: xi_K must exceed E_K");
  if (!(cp.re_max > cp.xi_K)) throw Error("contour: re_max must exceed xi_K");
  const double x_c = std::log(tp.z) / tp.beta;
  if (tp.eps == -1 && !(cp.E_K > x_c + 1e-9))
    throw Error(
        "contour encloses the real Bose branch point at xi = beta^{-1} ln z; "
        "move E_K to the right of it");

  const double y_flat = cp.theta / (2.0 * tp.beta);
  const double y_top = y_flat + (cp.re_max - cp.xi_K) * std::tan(cp.sigma);
  std::vector<Cut> cuts = branch_cuts(tp, y_top);

  // upper half, positively oriented: incoming ray, flat, vertical down to axis
  std::vector<Segment> upper = {
      {cplx(cp.re_max, y_top), cplx(cp.xi_K, y_flat)},
      {cplx(cp.xi_K, y_flat), cplx(cp.E_K, y_flat)},
      {cplx(cp.E_K, y_flat), cplx(cp.E_K, 0.0)},
  };
  for (const Segment& s : upper) {
    for (const Cut& c : cuts) {
      reject_cut_crossing(s, c, tp);
      Segment mirror{std::conj(s.z0), std::conj(s.z1)};
      reject_cut_crossing(mirror, c, tp);
    }
  }
  // enclosure of a branch point that never intersects a segment (fully inside)
  auto envelope = [&](double x) {
    if (x <= cp.xi_K) return y_flat;
    return y_flat + (x - cp.xi_K) * std::tan(cp.sigma);
  };
  for (const Cut& c : cuts) {
    if (c.x_c > cp.E_K && c.x_c < cp.re_max && std::abs(c.y) < envelope(c.x_c)) {
      std::ostringstream msg;
      msg << "contour encloses the branch point at " << c.x_c << " + " << c.y
          << "i of the grand-canonical logarithm";
      throw Error(msg.str());
    }
  }

  std::vector<Segment> panels;
  for (const Segment& s : upper)
    panelize(s, spectrum_floor, cuts, cp.panel_factor, 0, panels);

  std::vector<double> gx, gw;
  gauss_legendre(cp.nodes_per_segment, gx, gw);

  Contour contour;
  contour.params = cp;
  contour.tp = tp;
  contour.spectrum_floor = spectrum_floor;
  for (const Segment& s : panels) {
    cplx mid = 0.5 * (s.z0 + s.z1), half = 0.5 * (s.z1 - s.z0);
    for (int k = 0; k < cp.nodes_per_segment; ++k) {
      contour.xi.push_back(mid + gx[k] * half);
      contour.w.push_back(gw[k] * half);
    }
  }
  // lower half: exact conjugate mirror, so Schwarz-symmetric integrands sum
  // to a purely imaginary value before the i/(2 pi) prefactor
  const size_t n_up = contour.xi.size();
  for (size_t k = 0; k < n_up; ++k) {
    contour.xi.push_back(std::conj(contour.xi[k]));
    contour.w.push_back(-std::conj(contour.w[k]));
  }

  contour.eta = std::numeric_limits<double>::max();
  for (cplx xi : contour.xi) {
    contour.eta = std::min(contour.eta, dist_to_spectrum(xi, spectrum_floor));
    cplx denom = 1.0 + static_cast<double>(tp.eps) * tp.z * std::exp(-tp.beta * xi);
    if (std::abs(denom) < 1e-6) {
      std::ostringstream msg;
      msg << "contour node at " << xi.real() << " + " << xi.imag()
          << "i comes within 1e-6 of a logarithmic branch point";
      throw Error(msg.str());
    }
  }
  if (contour.eta < 1e-6) throw Error("contour touches spectrum: node clearance below 1e-6");

  contour.tail = tp.z * std::exp(-tp.beta * cp.re_max);
  if (!(contour.tail < 1e-18)) {
    std::ostringstream msg;
    msg << "contour: truncated ray tail bound z e^{-beta re_max} = " << contour.tail
        << " exceeds 1e-18; increase re_max";
    throw Error(msg.str());
  }
  return contour;
}

TridiagTrace::TridiagTrace(const MatrixXcd& H) {
  const long long n = H.rows();
  if (n == 1) {
    d_.resize(1);
    d_[0] = H(0, 0).real();
    e_.resize(0);
    return;
  }
  Eigen::Tridiagonalization<MatrixXcd> tri(H);
  d_ = tri.diagonal();
  e_ = tri.subDiagonal();
}

cplx TridiagTrace::trace_resolvent(cplx xi) const {
  // forward/backward continuant recurrences for the diagonal of (T - xi)^{-1}
  const long long n = d_.size();
  std::vector<cplx> fwd(n), bwd(n);
  fwd[0] = d_[0] - xi;
  for (long long i = 1; i < n; ++i) fwd[i] = d_[i] - xi - e_[i - 1] * e_[i - 1] / fwd[i - 1];
  bwd[n - 1] = d_[n - 1] - xi;
  for (long long i = n - 2; i >= 0; --i) bwd[i] = d_[i] - xi - e_[i] * e_[i] / bwd[i + 1];
  cplx tr = 0.0;
  for (long long i = 0; i < n; ++i) tr += 1.0 / (fwd[i] + bwd[i] - (d_[i] - xi));
  return tr;
}

namespace {

// shared quadrature driver: v(xi_m) summed against w f_eps, with the
// Dunford-Schwartz prefactor applied and the imaginary residual reported
template <class NodeFn>
double contour_quadrature(const Contour& contour, const ThermoParams& tp, double volume,
                          NodeFn&& node_value, double* imag_residual) {
  const long n = static_cast<long>(contour.xi.size());
  std::vector<cplx> slot(n);
  par::run(n, [&](long m) {
    slot[m] = contour.w[m] * f_eps(tp, contour.xi[m]) * node_value(contour.xi[m]);
  });
  cplx total = par::sum_ordered(slot);
  cplx val = cplx(0.0, 1.0) / (2.0 * kPi) * static_cast<double>(tp.eps) / (tp.beta * volume) *
             total;
  if (imag_residual)
    *imag_residual = std::abs(val.imag()) / std::max(std::abs(val.real()), 1e-300);
  return val.real();
}

}  // namespace

double pressure_contour(const HamiltonianPolynomial& hp, double b, const ThermoParams& tp,
                        const Contour& contour, double* imag_residual) {
  tp.validate();
  TridiagTrace tt(hp.assemble(b));
  return contour_quadrature(
      contour, tp, hp.grid.volume(), [&](cplx xi) { return tt.trace_resolvent(xi); },
      imag_residual);
}

double xn_trace_contour(const HamiltonianPolynomial& hp, double b, const ThermoParams& tp,
                        const Contour& contour, int n, XnMode mode, double* imag_residual) {
  if (n < 1 || n > 3) throw Error("xn_trace_contour: n must be 1, 2 or 3");
  tp.validate();
  MatrixXcd H = hp.assemble(b);
  auto node_value = [&](cplx xi) -> cplx {
    MatrixXcd R = resolvent(H, xi);
    if (mode == XnMode::Exact) return derivative_expansion(hp, b, R, n).trace();
    TOperators T = build_T_operators(hp, b, xi, R);
    switch (n) {
      case 1:
        return -(R * T.T1).trace();
      case 2:
        return 2.0 * (R * (T.T1 * T.T1 - T.T2)).trace();
      default: {
        MatrixXcd U1 = R * (T.T1 * T.T2 + T.T2 * T.T1 - T.T1 * T.T1 * T.T1);
        return 6.0 * (U1.trace() + u2_trace_fast(hp.grid, R, T.T1));
      }
    }
  };
  double val =
      contour_quadrature(contour, tp, hp.grid.volume(), node_value, imag_residual);
  return std::pow(tp.qc_ratio, n) * val;
}

XnTraces xn_traces_combined(const HamiltonianPolynomial& hp, double b, const ThermoParams& tp,
                            const Contour& contour) {
  tp.validate();
  MatrixXcd H = hp.assemble(b);
  const long n = static_cast<long>(contour.xi.size());
  std::vector<std::array<cplx, 4>> slot(n);
  par::run(n, [&](long m) {
    cplx xi = contour.xi[m];
    cplx wf = contour.w[m] * f_eps(tp, xi);
    MatrixXcd R = resolvent(H, xi);
    SOperators S = build_S_operators(hp, b, R);
    MatrixXcd RS1 = R * S.S1;
    TOperators T = build_T_operators(hp, b, xi, R);
    MatrixXcd RT1 = R * T.T1;
    slot[m][0] = wf * (-RS1.trace());
    slot[m][1] = wf * 2.0 * ((RS1 * S.S1).trace() - (R * S.S2).trace());
    slot[m][2] = wf * (-RT1.trace());
    slot[m][3] = wf * 2.0 * ((RT1 * T.T1).trace() - (R * T.T2).trace());
  });
  const double pref = static_cast<double>(tp.eps) / (tp.beta * hp.grid.volume());
  XnTraces out;
  double* vals[4] = {&out.X1_exact, &out.X2_exact, &out.X1_kernel, &out.X2_kernel};
  for (int k = 0; k < 4; ++k) {
    std::vector<cplx> col(n);
    for (long m = 0; m < n; ++m) col[m] = slot[m][k];
    cplx v = cplx(0.0, 1.0) / (2.0 * kPi) * pref * par::sum_ordered(col);
    *vals[k] = std::pow(tp.qc_ratio, (k % 2) + 1) * v.real();
    out.imag_residual = std::max(
        out.imag_residual, std::abs(v.imag()) / std::max(std::abs(v.real()), 1e-300));
  }
  return out;
}

void dump_contour_csv(const Contour& contour, std::ostream& os) {
  os << "re,im,w_re,w_im,f_re,f_im\n";
  for (size_t m = 0; m < contour.xi.size(); ++m) {
    cplx f = f_eps(contour.tp, contour.xi[m]);
    os << contour.xi[m].real() << ',' << contour.xi[m].imag() << ',' << contour.w[m].real()
       << ',' << contour.w[m].imag() << ',' << f.real() << ',' << f.imag() << '\n';
  }
}

}  // namespace diamag
