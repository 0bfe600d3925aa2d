#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "diamag/potentials.hpp"
#include "diamag/rng.hpp"

using namespace diamag;

TEST_CASE("alloy: zero coupling gives zero field") {
  Grid g = make_grid(2, 8.0, 9);
  AlloyModel m;
  m.g = 0.0;
  PotentialField f = sample_alloy(g, m, 99);
  CHECK(f.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("alloy: degenerate couplings with unit-cell box profile tile to 1") {
  // half-open box indicator of the unit cell: translates partition space
  Grid g = make_grid(2, 8.0, 15);
  AlloyModel m;
  m.g = 1.0;
  m.law = CouplingLaw::Degenerate;
  m.degenerate_value = 1.0;
  m.profile = SingleSiteProfile::box(0.5);
  PotentialField f = sample_alloy(g, m, 0);
  for (long long i = 0; i < g.nodes(); ++i)
    CHECK(f.values[i] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("alloy: deterministic and equal to the brute-force lattice sum") {
  Grid g = make_grid(2, 8.0, 11);
  AlloyModel m;
  m.g = 1.0;
  m.law = CouplingLaw::Uniform;
  m.profile = SingleSiteProfile::gaussian(1.0, 0.35);
  PotentialField f1 = sample_alloy(g, m, 42);
  PotentialField f2 = sample_alloy(g, m, 42);
  CHECK((f1.values - f2.values).cwiseAbs().maxCoeff() == 0.0);

  // independent double loop: every integer site whose support can reach the box
  int reach = static_cast<int>(std::ceil(g.side / 2.0 + m.profile.radius)) + 1;
  for (long long i = 0; i < g.nodes(); ++i) {
    Eigen::Vector3d x = g.coord(i);
    double direct = 0.0;
    for (int j0 = -reach; j0 <= reach; ++j0)
      for (int j1 = -reach; j1 <= reach; ++j1) {
        std::array<int, 3> site{j0, j1, 0};
        // same coupling stream as the sampler: seed, domain tag, site fold
        double lam = rng::Key(42).fold(0x616c6c6fULL).fold_site(site).sym();
        Eigen::Vector3d r = x - Eigen::Vector3d(j0, j1, 0.0);
        direct += m.g * lam * m.profile.value(r, g.dim);
      }
    CHECK(f1.values[i] == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("alloy: bounded by coupling x sup|u| x overlap count") {
  Grid g = make_grid(2, 10.0, 13);
  AlloyModel m;
  m.g = 0.7;
  m.profile = SingleSiteProfile::gaussian(1.5, 0.5);
  PotentialField f = sample_alloy(g, m, 3);
  // translates overlapping a point: at most (2 ceil(radius) + 1)^d
  double overlap = std::pow(2 * std::ceil(m.profile.radius) + 1, g.dim);
  CHECK(f.values.cwiseAbs().maxCoeff() <= m.g * m.profile.max_abs() * overlap);
}

TEST_CASE("poisson: zero intensity gives the empty field") {
  Grid g = make_grid(2, 6.0, 9);
  PoissonModel m;
  m.lambda = 0.0;
  PotentialField f = sample_poisson(g, m, 5);
  CHECK(f.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("poisson: single injected point reproduces the profile") {
  Grid g = make_grid(1, 6.0, 23);
  SingleSiteProfile u = SingleSiteProfile::cosine(1.0);
  PotentialField f = field_from_points(g, u, {Eigen::Vector3d::Zero()});
  for (long long i = 0; i < g.nodes(); ++i)
    CHECK(f.values[i] == doctest::Approx(u.value(g.coord(i), 1)).epsilon(1e-14));
}

TEST_CASE("poisson: non-negative values") {
  Grid g = make_grid(2, 6.0, 9);
  PoissonModel m;
  m.lambda = 2.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    PotentialField f = sample_poisson(g, m, s);
    CHECK(f.values.minCoeff() >= 0.0);
  }
}

TEST_CASE("poisson: empirical mean at the center matches intensity x integral") {
  // Campbell's formula E V(x) = lambda int u, with int u by numerical quadrature
  Grid g = make_grid(1, 4.0, 7);
  PoissonModel m;
  m.lambda = 1.0;
  m.profile = SingleSiteProfile::cosine(1.0);
  long long center = g.nodes() / 2;
  const int n_seeds = 10000;
  double sum = 0.0, sumsq = 0.0;
  for (int s = 0; s < n_seeds; ++s) {
    double v = sample_poisson(g, m, 1000 + s).values[center];
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / n_seeds;
  double se = std::sqrt((sumsq / n_seeds - mean * mean) / n_seeds);
  double expected = m.lambda * m.profile.integral(1);
  CHECK(std::abs(mean - expected) <= 3.0 * se);
}

TEST_CASE("periodic: zero profile, periodicity, and the alloy oracle") {
  Grid g = make_grid(2, 8.0, 15);
  CHECK(sample_periodic(g, SingleSiteProfile::zero()).values.cwiseAbs().maxCoeff() == 0.0);

  SingleSiteProfile u = SingleSiteProfile::cosine(0.5);
  PotentialField f = sample_periodic(g, u);
  // interior nodes one cell from the boundary: f(x) = f(x + e1)
  const double h = g.spacing();
  int per_cell = static_cast<int>(std::lround(1.0 / h));
  REQUIRE(std::abs(per_cell * h - 1.0) < 1e-12);  // commensurate grid
  for (long long i = 0; i < g.nodes(); ++i) {
    std::array<int, 3> midx = g.unflatten(i);
    if (g.depth(g.coord(i)) <= 1.0 + h) continue;
    std::array<int, 3> shifted = midx;
    shifted[0] += per_cell;
    CHECK(f.values[i] == doctest::Approx(f.values[g.flatten(shifted)]).epsilon(1e-13));
  }

  AlloyModel a;
  a.g = 1.0;
  a.law = CouplingLaw::Degenerate;
  a.degenerate_value = 1.0;
  a.profile = u;
  PotentialField fa = sample_alloy(g, a, 0);
  CHECK((f.values - fa.values).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("sparse barrier: envelope, non-negativity, zero scale, alpha guard") {
  Grid g = make_grid(2, 12.0, 23);
  SparseBarrierModel m;
  m.height_scale = 0.0;
  CHECK(sample_sparse_barrier(g, m, 1).values.cwiseAbs().maxCoeff() == 0.0);

  m.height_scale = 1.0;
  m.alpha = 0.25;
  PotentialField f = sample_sparse_barrier(g, m, 7);
  CHECK(f.values.minCoeff() >= 0.0);
  for (long long i = 0; i < g.nodes(); ++i) {
    double env = m.height_scale * (1.0 + std::pow(g.coord(i).norm(), m.alpha));
    CHECK(f.values[i] <= env + 1e-12);
  }

  m.alpha = 0.5;
  CHECK_THROWS_AS(sample_sparse_barrier(g, m, 7), Error);
}

TEST_CASE("sparse barrier: forced origin barrier bounded at |x| <= 1") {
  Grid g = make_grid(2, 12.0, 23);
  SparseBarrierModel m;
  m.alpha = 0.2;
  m.height_scale = 1.0;
  m.force_origin = true;
  PotentialField f = sample_sparse_barrier(g, m, 11);
  double near_origin_max = 0.0;
  for (long long i = 0; i < g.nodes(); ++i)
    if (g.coord(i).norm() <= 1.0) near_origin_max = std::max(near_origin_max, f.values[i]);
  CHECK(near_origin_max > 0.0);  // the barrier is present
  CHECK(near_origin_max <= m.height_scale * std::pow(2.0, m.alpha) + 1e-12);
}

TEST_CASE("stationarity: exact shift identity for |k| <= 3, plus composition") {
  Grid g = make_grid(2, 14.0, 27);
  AlloyModel m;
  m.g = 1.0;
  m.profile = SingleSiteProfile::gaussian(1.0, 0.35);
  PotentialField f = sample_alloy(g, m, 17);

  PotentialField f0 = shift_realization(f, {0, 0, 0});
  CHECK((f0.values - f.values).cwiseAbs().maxCoeff() == 0.0);

  const double h = g.spacing();
  int per_unit = static_cast<int>(std::lround(1.0 / h));
  REQUIRE(std::abs(per_unit * h - 1.0) < 1e-12);
  for (int k0 = -3; k0 <= 3; ++k0)
    for (int k1 = -3; k1 <= 3; ++k1) {
      std::array<int, 3> k{k0, k1, 0};
      PotentialField fs = shift_realization(f, k);
      double kn = std::sqrt(double(k0) * k0 + double(k1) * k1);
      for (long long i = 0; i < g.nodes(); ++i) {
        Eigen::Vector3d x = g.coord(i);
        if (g.depth(x) <= m.profile.radius + kn + h) continue;
        std::array<int, 3> midx = g.unflatten(i);
        std::array<int, 3> src{midx[0] - k0 * per_unit, midx[1] - k1 * per_unit, 0};
        // new field(x) = old field(x - k) exactly on the interior
        CHECK(fs.values[i] == f.values[g.flatten(src)]);
      }
    }

  PotentialField f12 = shift_realization(shift_realization(f, {1, 0, 0}), {0, 1, 0});
  PotentialField fd = shift_realization(f, {1, 1, 0});
  for (long long i = 0; i < g.nodes(); ++i) {
    if (g.depth(g.coord(i)) <= m.profile.radius + 2.0 + h) continue;
    CHECK(f12.values[i] == fd.values[i]);
  }
}

TEST_CASE("stationarity holds for poisson and sparse-barrier streams too") {
  Grid g = make_grid(2, 14.0, 27);
  const double h = g.spacing();
  int per_unit = static_cast<int>(std::lround(1.0 / h));
  auto check_shift = [&](const PotentialModel& model, double radius) {
    PotentialField f = sample_model(g, model, 23);
    std::array<int, 3> k{2, -1, 0};
    PotentialField fs = shift_realization(f, k);
    double kn = std::sqrt(5.0);
    for (long long i = 0; i < g.nodes(); ++i) {
      if (g.depth(g.coord(i)) <= radius + kn + 1.0 + h) continue;
      std::array<int, 3> m = g.unflatten(i);
      std::array<int, 3> src{m[0] - k[0] * per_unit, m[1] - k[1] * per_unit, 0};
      // non-integer bump centers: adding the integer shift can round the
      // center by one ulp, so the identity is exact only to rounding error
      double ref = f.values[g.flatten(src)];
      CHECK(fs.values[i] == doctest::Approx(ref).epsilon(1e-12));
    }
  };
  check_shift(PoissonModel{}, PoissonModel{}.profile.radius);
  check_shift(SparseBarrierModel{}, SparseBarrierModel{}.profile.radius);
}

TEST_CASE("field serialization round-trips through the binary layout") {
  Grid g = make_grid(2, 6.0, 9);
  AlloyModel m;
  PotentialField f = sample_alloy(g, m, 12);
  std::stringstream buf;
  save_field_binary(f, buf);
  PotentialField f2 = load_field_binary(buf);
  CHECK(f2.grid.dim == g.dim);
  CHECK(f2.grid.n_per_side == g.n_per_side);
  CHECK(f2.seed == f.seed);
  CHECK((f2.values - f.values).cwiseAbs().maxCoeff() == 0.0);

  std::ostringstream csv;
  save_field_csv(f, csv);
  CHECK(csv.str().find(',') != std::string::npos);
}

TEST_CASE("model validation errors") {
  Grid g = make_grid(1, 4.0, 7);
  AlloyModel m;
  m.profile = SingleSiteProfile::gaussian(3.0, 0.35);  // radius > half-side
  CHECK_THROWS_AS(sample_alloy(g, m, 1), Error);
  PoissonModel p;
  p.lambda = -1.0;
  CHECK_THROWS_AS(sample_poisson(g, p, 1), Error);
  PoissonModel pneg;
  pneg.profile = SingleSiteProfile::cosine(1.0, -1.0);  // negative profile
  CHECK_THROWS_AS(sample_poisson(g, pneg, 1), Error);
}
