#include "diamag/thermo.hpp"

#include <cmath>
#include <sstream>

namespace diamag {

void ThermoParams::validate() const {
  if (!(beta > 0.0)) throw Error("thermo: beta must be positive");
  if (!(z > 0.0)) throw Error("thermo: fugacity must be positive");
  if (eps != 1 && eps != -1) throw Error("thermo: eps must be +1 (Fermi) or -1 (Bose)");
  if (!(qc_ratio != 0.0)) throw Error("thermo: q/c must be nonzero");
}

void check_admissible(const ThermoParams& tp, double e_min) {
  tp.validate();
  if (tp.eps == -1) {
    double v = tp.z * std::exp(-tp.beta * e_min);
    if (v >= 1.0 - 1e-9) {
      std::ostringstream msg;
      msg << "Bose fugacity outside the domain D_{-1} = C \\ [e^{beta E0}, inf): "
          << "z e^{-beta e_min} = " << v << " with e_min = " << e_min;
      throw Error(msg.str());
    }
  }
}

namespace {
// terms with z e^{-beta e} below this are provably under the 1e-16 tail bound
constexpr double kTermTol = 1e-18;
}  // namespace

double pressure_eigensum(const VectorXd& e, const ThermoParams& tp, double volume) {
  check_admissible(tp, e.size() ? e.minCoeff() : 0.0);
  double s = 0.0;
  for (long long j = 0; j < e.size(); ++j) {
    double t = tp.z * std::exp(-tp.beta * e[j]);
    if (t < kTermTol) continue;
    s += tp.eps * std::log1p(tp.eps * t);
  }
  return s / (tp.beta * volume);
}

double density_eigensum(const VectorXd& e, const ThermoParams& tp, double volume) {
  check_admissible(tp, e.size() ? e.minCoeff() : 0.0);
  double s = 0.0;
  for (long long j = 0; j < e.size(); ++j) {
    double t = tp.z * std::exp(-tp.beta * e[j]);
    if (t < kTermTol) continue;
    s += t / (1.0 + tp.eps * t);
  }
  return s / volume;
}

double susceptibility_finite_difference(const HamiltonianPolynomial& hp, const ThermoParams& tp,
                                        double b, int n, double step) {
  if (n < 1 || n > 3) throw Error("susceptibility_finite_difference: n must be 1, 2 or 3");
  if (hp.grid.dim < 2) return 0.0;
  const double vol = hp.grid.volume();
  auto P = [&](double bb) {
    Spectrum s = eigensolve(hp.assemble(bb));
    return pressure_eigensum(s.e, tp, vol);
  };
  double s0 = step > 0.0 ? step : 1e-3 * std::max(1.0, std::abs(b));
  auto diff = [&](double s) {
    switch (n) {
      case 1:
        return (P(b + s) - P(b - s)) / (2.0 * s);
      case 2:
        return (P(b + s) - 2.0 * P(b) + P(b - s)) / (s * s);
      default:
        return (P(b + 2 * s) - 2.0 * P(b + s) + 2.0 * P(b - s) - P(b - 2 * s)) /
               (2.0 * s * s * s);
    }
  };
  double d_full = diff(s0), d_half = diff(s0 / 2);
  double val = (4.0 * d_half - d_full) / 3.0;
  return std::pow(tp.qc_ratio, n) * val;
}

double susceptibility_quadratic_response(const Spectrum& spec, const HamiltonianPolynomial& hp,
                                         const ThermoParams& tp, double b) {
  check_admissible(tp, spec.e.size() ? spec.e.minCoeff() : 0.0);
  if (hp.grid.dim < 2) return 0.0;
  const long long N = spec.e.size();
  auto gp = [&](double e) {  // g'(e), g = ln(1 + eps z e^{-beta e})
    double t = tp.z * std::exp(-tp.beta * e);
    return -tp.beta * tp.eps * t / (1.0 + tp.eps * t);
  };
  auto gpp = [&](double e) {  // g''(e)
    double t = tp.z * std::exp(-tp.beta * e);
    double u = 1.0 + tp.eps * t;
    return tp.beta * tp.beta * tp.eps * t / (u * u);
  };
  // diagonal part: Tr(g'(H) H'') with H'' = 2 H2
  double diag_term = 0.0;
  for (long long j = 0; j < N; ++j) {
    double g1 = gp(spec.e[j]);
    if (std::abs(g1) < tp.beta * kTermTol) continue;
    double h2jj = 0.0;
    for (long long i = 0; i < N; ++i) h2jj += hp.h2[i] * std::norm(spec.psi(i, j));
    diag_term += 2.0 * g1 * h2jj;
  }
  // off-diagonal part: sum_{jk} |M_jk|^2 g^{[1]}(e_j, e_k), M = Psi^* H'(b) Psi
  MatrixXcd M = spec.psi.adjoint() * hp.h_prime(b) * spec.psi;
  double pair_term = 0.0;
  for (long long j = 0; j < N; ++j) {
    double gj = gp(spec.e[j]);
    for (long long k = 0; k < N; ++k) {
      double gk = gp(spec.e[k]);
      if (std::abs(gj) < tp.beta * kTermTol && std::abs(gk) < tp.beta * kTermTol) continue;
      double de = spec.e[j] - spec.e[k];
      double dd = std::abs(de) < 1e-7 ? gpp(0.5 * (spec.e[j] + spec.e[k])) : (gj - gk) / de;
      pair_term += std::norm(M(j, k)) * dd;
    }
  }
  double d2p = tp.eps / (tp.beta * hp.grid.volume()) * (diag_term + pair_term);
  return tp.qc_ratio * tp.qc_ratio * d2p;
}

double magnetization_hellmann_feynman(const Spectrum& spec, const HamiltonianPolynomial& hp,
                                      const ThermoParams& tp, double b) {
  check_admissible(tp, spec.e.size() ? spec.e.minCoeff() : 0.0);
  if (hp.grid.dim < 2) return 0.0;
  MatrixXcd Hp = hp.h_prime(b);
  double s = 0.0;
  for (long long j = 0; j < spec.e.size(); ++j) {
    double t = tp.z * std::exp(-tp.beta * spec.e[j]);
    if (t < kTermTol) continue;
    double f = t / (1.0 + tp.eps * t);
    // <psi_j, H' psi_j>; summing over a degenerate cluster equals its
    // subspace trace, so no explicit clustering is needed
    double de = (spec.psi.col(j).adjoint() * Hp * spec.psi.col(j))(0, 0).real();
    s += f * de;
  }
  return -tp.qc_ratio * s / hp.grid.volume();
}

}  // namespace diamag
