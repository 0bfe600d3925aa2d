#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "diamag/rng.hpp"
#include "diamag/thermo.hpp"

using namespace diamag;

namespace {

HamiltonianPolynomial alloy_hp(int dim, double L, int n, std::uint64_t seed) {
  Grid g = make_grid(dim, L, n);
  return build_hamiltonian(g, sample_model(g, AlloyModel{}, seed));
}

VectorXd random_spectrum(int n, std::uint64_t seed) {
  rng::Key k(seed);
  VectorXd e(n);
  for (int i = 0; i < n; ++i) e[i] = 4.0 * k.fold_int(i).u01() + 0.2;
  return e;
}

}  // namespace

TEST_CASE("single-eigenvalue pressure and density") {
  VectorXd e = VectorXd::Zero(1);
  ThermoParams tp;
  tp.beta = 1.0;
  tp.z = 0.5;
  tp.eps = +1;
  CHECK(pressure_eigensum(e, tp, 1.0) == doctest::Approx(std::log(1.5)).epsilon(1e-14));
  CHECK(density_eigensum(e, tp, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("Maxwell-Boltzmann limit: statistics-independent at z -> 0") {
  VectorXd e = random_spectrum(40, 2);
  ThermoParams f, b;
  f.beta = b.beta = 1.3;
  f.z = b.z = 1e-8;
  f.eps = +1;
  b.eps = -1;
  double pf = pressure_eigensum(e, f, 1.0), pb = pressure_eigensum(e, b, 1.0);
  CHECK(std::abs(pf - pb) / pf <= 1e-7);
}

TEST_CASE("density equals beta z dP/dz") {
  VectorXd e = random_spectrum(40, 3);
  ThermoParams tp;
  tp.beta = 0.9;
  tp.z = 0.4;
  double dz = 1e-6;
  ThermoParams tpp = tp, tpm = tp;
  tpp.z = tp.z + dz;
  tpm.z = tp.z - dz;
  double dPdz = (pressure_eigensum(e, tpp, 1.0) - pressure_eigensum(e, tpm, 1.0)) / (2 * dz);
  CHECK(density_eigensum(e, tp, 1.0) ==
        doctest::Approx(tp.beta * tp.z * dPdz).epsilon(1e-8));
}

TEST_CASE("Bose density increases toward the fugacity boundary") {
  VectorXd e = random_spectrum(20, 4);
  double e0 = e.minCoeff();
  ThermoParams tp;
  tp.eps = -1;
  tp.beta = 1.0;
  double zmax = std::exp(tp.beta * e0);
  double prev = 0.0;
  for (double frac : {0.2, 0.4, 0.6, 0.8, 0.95}) {
    tp.z = frac * zmax;
    double rho = density_eigensum(e, tp, 1.0);
    CHECK(rho > prev);
    prev = rho;
  }
  tp.z = zmax;  // on the boundary: rejected
  CHECK_THROWS_AS(pressure_eigensum(e, tp, 1.0), Error);
}

TEST_CASE("pressure even in b; monotone in z; Bose >= Fermi") {
  HamiltonianPolynomial hp = alloy_hp(2, 6.0, 9, 6);
  ThermoParams tp;
  tp.beta = 1.0;
  tp.z = 0.3;
  const double vol = hp.grid.volume();
  rng::Key k(5);
  for (int t = 0; t < 10; ++t) {
    double b = k.fold_int(t).sym();
    double pp = pressure_eigensum(eigensolve(hp.assemble(b)).e, tp, vol);
    double pm = pressure_eigensum(eigensolve(hp.assemble(-b)).e, tp, vol);
    CHECK(std::abs(pp - pm) <= 1e-10 * std::max(1.0, std::abs(pp)));
  }

  VectorXd e = random_spectrum(30, 8);
  double prev = 0.0;
  for (double z : {0.1, 0.2, 0.4, 0.8}) {
    ThermoParams t2;
    t2.z = z;
    double p = pressure_eigensum(e, t2, 1.0);
    CHECK(p > prev);
    prev = p;
    ThermoParams tb = t2;
    tb.eps = -1;
    CHECK(pressure_eigensum(e, tb, 1.0) >= p);
  }
}

TEST_CASE("spectral tail truncation does not affect the sum") {
  VectorXd e = random_spectrum(20, 9);
  VectorXd e2(e.size() + 2);
  e2 << e, 1e5, 1e6;  // provably below the term tolerance
  ThermoParams tp;
  CHECK(pressure_eigensum(e, tp, 1.0) == pressure_eigensum(e2, tp, 1.0));
}

TEST_CASE("finite-difference susceptibility: d=1 trivial, parity zero at b=0") {
  HamiltonianPolynomial hp1 = alloy_hp(1, 8.0, 15, 3);
  ThermoParams tp;
  tp.beta = 1.0;
  tp.z = 0.3;
  for (int n = 1; n <= 3; ++n) CHECK(susceptibility_finite_difference(hp1, tp, 0.4, n) == 0.0);

  HamiltonianPolynomial hp = alloy_hp(2, 6.0, 9, 21);
  CHECK(std::abs(susceptibility_finite_difference(hp, tp, 0.0, 1)) <= 1e-10);
}

TEST_CASE("free 2D Fermi gas is diamagnetic at beta=2, z=0.2") {
  Grid g = make_grid(2, 8.0, 7);
  HamiltonianPolynomial hp = build_hamiltonian(g, sample_zero(g));
  ThermoParams tp;
  tp.beta = 2.0;
  tp.z = 0.2;
  double x2 = susceptibility_finite_difference(hp, tp, 0.0, 2);
  CHECK(x2 < 0.0);
  // regression baseline, not an external value
  CHECK(x2 == doctest::Approx(-0.0121).epsilon(0.05));
}

TEST_CASE("Hellmann-Feynman magnetization: parity, d=1, and the FD oracle") {
  ThermoParams tp;
  tp.beta = 1.0;
  tp.z = 0.3;
  HamiltonianPolynomial hp1 = alloy_hp(1, 8.0, 15, 3);
  Spectrum s1 = eigensolve(hp1.assemble(0.5));
  CHECK(magnetization_hellmann_feynman(s1, hp1, tp, 0.5) == 0.0);

  HamiltonianPolynomial hp = alloy_hp(2, 6.0, 11, 14);
  Spectrum s0 = eigensolve(hp.assemble(0.0));
  CHECK(std::abs(magnetization_hellmann_feynman(s0, hp, tp, 0.0)) <= 1e-10);

  Spectrum s = eigensolve(hp.assemble(0.5));
  double hf = magnetization_hellmann_feynman(s, hp, tp, 0.5);
  double fd = susceptibility_finite_difference(hp, tp, 0.5, 1);
  CHECK(std::abs(hf - fd) / std::abs(hf) <= 1e-6);
}

TEST_CASE("quadratic response trace formula matches the FD susceptibility") {
  ThermoParams tp;
  tp.beta = 1.0;
  tp.z = 0.3;
  HamiltonianPolynomial hp = alloy_hp(2, 6.0, 11, 14);
  for (double b : {0.0, 0.5}) {
    Spectrum s = eigensolve(hp.assemble(b));
    double dk = susceptibility_quadratic_response(s, hp, tp, b);
    double fd = susceptibility_finite_difference(hp, tp, b, 2);
    CHECK(std::abs(dk - fd) / std::abs(dk) <= 1e-5);  // FD truncation dominates
  }
  // d=1: identically zero
  HamiltonianPolynomial hp1 = alloy_hp(1, 8.0, 15, 3);
  Spectrum s1 = eigensolve(hp1.assemble(0.2));
  CHECK(susceptibility_quadratic_response(s1, hp1, tp, 0.2) == 0.0);
}

TEST_CASE("parameter validation") {
  ThermoParams tp;
  tp.beta = -1.0;
  CHECK_THROWS_AS(tp.validate(), Error);
  tp = ThermoParams{};
  tp.eps = 2;
  CHECK_THROWS_AS(tp.validate(), Error);
  tp = ThermoParams{};
  tp.z = 0.0;
  CHECK_THROWS_AS(tp.validate(), Error);
}
