#include "diamag/potentials.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "diamag/rng.hpp"

namespace diamag {

namespace {

constexpr std::uint64_t kTagAlloy = 0x616c6c6fULL;
constexpr std::uint64_t kTagSparsePresence = 0x73707072ULL;
constexpr std::uint64_t kTagSparseHeight = 0x7370687457ULL;
constexpr std::uint64_t kTagPoissonCount = 0x70636e74ULL;
constexpr std::uint64_t kTagPoissonPos = 0x70706f73ULL;

// accumulate amp * u(x - center) over the nodes whose coordinates fall inside
// the profile support box
void add_bump(const Grid& g, const SingleSiteProfile& u, const Eigen::Vector3d& center,
              double amp, VectorXd& values) {
  if (amp == 0.0 || u.kind == SingleSiteProfile::Kind::Zero) return;
  const double h = g.spacing();
  const double r = u.radius;
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < g.dim; ++a) {
    // node index range with (i+1)h - L/2 in [c - r, c + r]
    lo[a] = std::max(0, static_cast<int>(std::ceil((center[a] - r + g.side / 2) / h)) - 1);
    hi[a] = std::min(g.n_per_side - 1,
                     static_cast<int>(std::floor((center[a] + r + g.side / 2) / h)) - 1);
    if (lo[a] > hi[a]) return;
  }
  std::array<int, 3> m = lo;
  while (true) {
    Eigen::Vector3d x = g.coord(m);
    values[g.flatten(m)] += amp * u.value(x - center, g.dim);
    int a = 0;
    for (; a < g.dim; ++a) {
      if (++m[a] <= hi[a]) break;
      m[a] = lo[a];
    }
    if (a == g.dim) break;
  }
}

// iteration range for integer site indices m such that pitch*m + shift lies
// within [-L/2 - pad, L/2 + pad]
std::pair<int, int> site_range(const Grid& g, int axis_shift, int pitch, double pad) {
  double lo = (-g.side / 2 - pad - axis_shift) / pitch;
  double hi = (g.side / 2 + pad - axis_shift) / pitch;
  return {static_cast<int>(std::ceil(lo)), static_cast<int>(std::floor(hi))};
}

template <class PerSite>
void for_each_site(const Grid& g, const std::array<int, 3>& shift, int pitch, double pad,
                   PerSite&& fn) {
  std::array<std::pair<int, int>, 3> rng;
  for (int a = 0; a < 3; ++a)
    rng[a] = a < g.dim ? site_range(g, shift[a], pitch, pad) : std::make_pair(0, 0);
  std::array<int, 3> m{rng[0].first, rng[1].first, rng[2].first};
  if (m[0] > rng[0].second || m[1] > rng[1].second || m[2] > rng[2].second) return;
  while (true) {
    fn(m);
    int a = 0;
    for (; a < 3; ++a) {
      if (++m[a] <= rng[a].second) break;
      m[a] = rng[a].first;
    }
    if (a == 3) break;
  }
}

double draw_coupling(const AlloyModel& mod, const rng::Key& k) {
  switch (mod.law) {
    case CouplingLaw::Uniform:
      return k.sym();
    case CouplingLaw::Degenerate:
      return mod.degenerate_value;
    case CouplingLaw::Rademacher:
      return k.u01() < 0.5 ? -1.0 : 1.0;
  }
  return 0.0;
}

void check_profile_fits(const Grid& g, const SingleSiteProfile& u) {
  if (u.kind != SingleSiteProfile::Kind::Zero && u.radius > g.side / 2)
    throw Error("potential: profile radius exceeds the box half-side");
}

PotentialField sample_impl(const Grid& g, const PotentialModel& model, std::uint64_t seed,
                           const std::array<int, 3>& shift) {
  PotentialField f{g, VectorXd::Zero(g.nodes()), model, seed, shift};
  Eigen::Vector3d sh = Eigen::Vector3d::Zero();
  for (int a = 0; a < g.dim; ++a) sh[a] = shift[a];

  if (std::holds_alternative<ZeroModel>(model)) return f;

  if (const auto* m = std::get_if<AlloyModel>(&model)) {
    if (m->law == CouplingLaw::Degenerate && std::abs(m->degenerate_value) > 1.0)
      throw Error("alloy: coupling law support must lie in [-1, 1]");
    check_profile_fits(g, m->profile);
    rng::Key base = rng::Key(seed).fold(kTagAlloy);
    for_each_site(g, shift, 1, m->profile.radius, [&](const std::array<int, 3>& s) {
      double lam = draw_coupling(*m, base.fold_site(s));
      Eigen::Vector3d c = Eigen::Vector3d::Zero();
      for (int a = 0; a < g.dim; ++a) c[a] = s[a] + shift[a];
      add_bump(g, m->profile, c, m->g * lam, f.values);
    });
    return f;
  }

  if (const auto* m = std::get_if<PoissonModel>(&model)) {
    if (m->lambda < 0.0) throw Error("poisson: intensity must be non-negative");
    if (!m->profile.nonnegative())
      throw Error("poisson: profile must be non-negative (non-negative Poisson random field)");
    check_profile_fits(g, m->profile);
    rng::Key base = rng::Key(seed);
    for_each_site(g, shift, 1, m->profile.radius + 0.5, [&](const std::array<int, 3>& s) {
      rng::Key cell = base.fold_site(s);
      int count = rng::poisson(cell.fold(kTagPoissonCount), m->lambda);
      for (int p = 0; p < count; ++p) {
        Eigen::Vector3d y = Eigen::Vector3d::Zero();
        for (int a = 0; a < g.dim; ++a)
          y[a] = s[a] + shift[a] + cell.fold(kTagPoissonPos).fold_int(p).fold_int(a).u01() - 0.5;
        add_bump(g, m->profile, y, 1.0, f.values);
      }
    });
    return f;
  }

  if (const auto* m = std::get_if<PeriodicModel>(&model)) {
    if (m->profile.radius > 0.5 && m->profile.kind != SingleSiteProfile::Kind::Zero)
      throw Error("periodic: profile must be supported in the unit cell");
    for_each_site(g, shift, 1, m->profile.radius, [&](const std::array<int, 3>& s) {
      Eigen::Vector3d c = Eigen::Vector3d::Zero();
      for (int a = 0; a < g.dim; ++a) c[a] = s[a] + shift[a];
      add_bump(g, m->profile, c, 1.0, f.values);
    });
    return f;
  }

  const auto& m = std::get<SparseBarrierModel>(model);
  if (!(m.alpha > 0.0) || m.alpha >= 1.0 / 3.0)
    throw Error(
        "sparse barrier: growth exponent alpha must lie in (0, 1/3) "
        "(hypothesis on the V2 growth envelope)");
  if (!m.profile.nonnegative() || m.profile.height <= 0.0)
    throw Error("sparse barrier: profile must be positive");
  if (m.spacing < 2.0 * m.profile.radius)
    throw Error("sparse barrier: pitch must be at least two profile radii");
  check_profile_fits(g, m.profile);
  rng::Key pres = rng::Key(seed).fold(kTagSparsePresence);
  rng::Key hgt = rng::Key(seed).fold(kTagSparseHeight);
  for_each_site(g, shift, m.spacing, m.profile.radius, [&](const std::array<int, 3>& s) {
    bool origin = s[0] == 0 && s[1] == 0 && s[2] == 0;
    bool present = pres.fold_site(s).u01() < 0.5;
    double v = hgt.fold_site(s).u01();
    if (origin && m.force_origin) {
      present = true;
      v = 1.0;
    }
    if (!present) return;
    // growth envelope attached to the disorder index: distance of the
    // unshifted support from the origin
    Eigen::Vector3d c0 = Eigen::Vector3d::Zero(), c = Eigen::Vector3d::Zero();
    for (int a = 0; a < g.dim; ++a) {
      c0[a] = static_cast<double>(s[a]) * m.spacing;
      c[a] = c0[a] + shift[a];
    }
    double inner = std::max(0.0, c0.norm() - m.profile.radius);
    double amp = m.height_scale * v * (1.0 + std::pow(inner, m.alpha));
    add_bump(g, m.profile, c, amp / m.profile.height, f.values);
  });
  return f;
}

}  // namespace

PotentialField sample_zero(const Grid& g) { return sample_impl(g, ZeroModel{}, 0, {0, 0, 0}); }

PotentialField sample_alloy(const Grid& g, const AlloyModel& m, std::uint64_t seed) {
  return sample_impl(g, m, seed, {0, 0, 0});
}

PotentialField sample_poisson(const Grid& g, const PoissonModel& m, std::uint64_t seed) {
  return sample_impl(g, m, seed, {0, 0, 0});
}

PotentialField sample_periodic(const Grid& g, const SingleSiteProfile& profile) {
  return sample_impl(g, PeriodicModel{profile}, 0, {0, 0, 0});
}

PotentialField sample_sparse_barrier(const Grid& g, const SparseBarrierModel& m,
                                     std::uint64_t seed) {
  return sample_impl(g, m, seed, {0, 0, 0});
}

PotentialField sample_model(const Grid& g, const PotentialModel& m, std::uint64_t seed) {
  return sample_impl(g, m, seed, {0, 0, 0});
}

PotentialField shift_realization(const PotentialField& f, const std::array<int, 3>& k) {
  if (std::holds_alternative<ZeroModel>(f.model) || std::holds_alternative<PeriodicModel>(f.model))
    throw Error("shift_realization: model has no disorder to shift");
  for (int a = 0; a < f.grid.dim; ++a)
    if (std::abs(static_cast<double>(k[a])) > f.grid.side / 2)
      throw Error("shift_realization: shift exceeds half the box");
  std::array<int, 3> ns{0, 0, 0};
  for (int a = 0; a < 3; ++a) ns[a] = f.shift[a] + k[a];
  return sample_impl(f.grid, f.model, f.seed, ns);
}

PotentialField field_from_points(const Grid& g, const SingleSiteProfile& profile,
                                 const std::vector<Eigen::Vector3d>& points) {
  PotentialField f{g, VectorXd::Zero(g.nodes()), PoissonModel{0.0, profile}, 0, {0, 0, 0}};
  for (const auto& p : points) add_bump(g, profile, p, 1.0, f.values);
  return f;
}

void save_field_binary(const PotentialField& f, std::ostream& os) {
  const char magic[8] = {'D', 'M', 'A', 'G', 'F', 'L', 'D', '1'};
  os.write(magic, 8);
  std::int32_t dim = f.grid.dim, n = f.grid.n_per_side;
  double h = f.grid.spacing(), side = f.grid.side;
  std::uint64_t seed = f.seed;
  std::int32_t shift[3] = {f.shift[0], f.shift[1], f.shift[2]};
  os.write(reinterpret_cast<const char*>(&dim), 4);
  os.write(reinterpret_cast<const char*>(&n), 4);
  os.write(reinterpret_cast<const char*>(&h), 8);
  os.write(reinterpret_cast<const char*>(&side), 8);
  os.write(reinterpret_cast<const char*>(&seed), 8);
  os.write(reinterpret_cast<const char*>(shift), 12);
  os.write(reinterpret_cast<const char*>(f.values.data()),
           static_cast<std::streamsize>(sizeof(double) * f.values.size()));
}

PotentialField load_field_binary(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "DMAGFLD1", 8) != 0) throw Error("field load: bad magic");
  std::int32_t dim = 0, n = 0;
  double h = 0, side = 0;
  std::uint64_t seed = 0;
  std::int32_t shift[3];
  is.read(reinterpret_cast<char*>(&dim), 4);
  is.read(reinterpret_cast<char*>(&n), 4);
  is.read(reinterpret_cast<char*>(&h), 8);
  is.read(reinterpret_cast<char*>(&side), 8);
  is.read(reinterpret_cast<char*>(&seed), 8);
  is.read(reinterpret_cast<char*>(shift), 12);
  Grid g = make_grid(dim, side, n);
  PotentialField f{g, VectorXd::Zero(g.nodes()), ZeroModel{}, seed,
                   {shift[0], shift[1], shift[2]}};
  is.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(sizeof(double) * f.values.size()));
  if (!is) throw Error("field load: truncated payload");
  return f;
}

void save_field_csv(const PotentialField& f, std::ostream& os) {
  os << "i1,i2,i3,x1,x2,x3,value\n";
  for (long long i = 0; i < f.values.size(); ++i) {
    auto m = f.grid.unflatten(i);
    auto x = f.grid.coord(m);
    os << m[0] << ',' << m[1] << ',' << m[2] << ',' << x[0] << ',' << x[1] << ',' << x[2] << ','
       << f.values[i] << '\n';
  }
}

}  // namespace diamag
