#include "diamag/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "diamag/parallel.hpp"

namespace diamag {

namespace {

double betacf(double a, double b, double x) {
  const int kMaxIt = 300;
  const double kFpMin = 1e-300, kEps = 1e-14;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIt; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

// regularized incomplete beta function I_x(a, b)
double betai(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

LStats stats_from(const std::vector<SeedObservables>& obs, double L) {
  LStats s;
  s.L = L;
  s.n_seeds = static_cast<int>(obs.size());
  auto accumulate = [&](auto get, double& mean, double& var, double& se) {
    double m = 0.0;
    for (const auto& o : obs) m += get(o);
    m /= obs.size();
    double v = 0.0;
    for (const auto& o : obs) v += (get(o) - m) * (get(o) - m);
    v = obs.size() > 1 ? v / (obs.size() - 1) : 0.0;
    mean = m;
    var = v;
    se = std::sqrt(v / obs.size());
  };
  accumulate([](const SeedObservables& o) { return o.P; }, s.mean_P, s.var_P, s.se_P);
  accumulate([](const SeedObservables& o) { return o.X1; }, s.mean_X1, s.var_X1, s.se_X1);
  accumulate([](const SeedObservables& o) { return o.X2; }, s.mean_X2, s.var_X2, s.se_X2);
  for (const auto& o : obs) {
    s.max_abs_X1 = std::max(s.max_abs_X1, std::abs(o.X1));
    s.max_abs_X2 = std::max(s.max_abs_X2, std::abs(o.X2));
  }
  s.raw = obs;
  return s;
}

EnsembleStats run_ladder(const SweepPlan& plan) {
  if (plan.L_ladder.empty()) throw Error("sweep: empty L ladder");
  if (plan.realizations < 1) throw Error("sweep: need at least one realization");
  plan.tp.validate();
  EnsembleStats stats;
  for (double L : plan.L_ladder) {
    Grid g = grid_for(L, plan.h, plan.dim);
    std::vector<SeedObservables> obs(plan.realizations);
    par::run(plan.realizations, [&](long r) {
      std::uint64_t seed = plan.base_seed ^ static_cast<std::uint64_t>(r);
      PotentialField f = sample_model(g, plan.model, seed);
      obs[r] = observables_for_field(f, plan.b, plan.tp, plan.cross_check);
    });
    stats.per_L.push_back(stats_from(obs, L));
  }
  if (plan.dim == 1 && std::holds_alternative<ZeroModel>(plan.model)) {
    stats.has_free_reference = true;
    stats.free_reference = free_pressure_1d_band(plan.h, plan.tp);
  }
  if (stats.per_L.size() >= 3) {
    std::vector<double> xs, ys;
    for (size_t i = 0; i + 1 < stats.per_L.size(); ++i) {
      double diff = std::abs(stats.per_L[i + 1].mean_P - stats.per_L[i].mean_P);
      if (diff > 0.0) {
        xs.push_back(std::sqrt(stats.per_L[i].L * stats.per_L[i + 1].L));
        ys.push_back(diff);
      }
    }
    if (xs.size() >= 2) stats.diff_decay_rate = -loglog_slope(xs, ys);
  }
  return stats;
}

}  // namespace

Grid grid_for(double L, double h, int dim) {
  if (!(h > 0.0)) throw Error("grid_for: spacing must be positive");
  int n = static_cast<int>(std::lround(L / h)) - 1;
  if (n < 1 || std::abs((n + 1) * h - L) > 1e-9 * std::max(1.0, L))
    throw Error("grid_for: L must be an integer multiple of h with at least 2 cells");
  return make_grid(dim, L, n);
}

SeedObservables observables_for_field(const PotentialField& field, double b,
                                      const ThermoParams& tp, bool cross_check) {
  HamiltonianPolynomial hp = build_hamiltonian(field.grid, field);
  Spectrum spec = eigensolve(hp.assemble(b));
  const double vol = field.grid.volume();
  SeedObservables out;
  out.P = pressure_eigensum(spec.e, tp, vol);
  out.X1 = magnetization_hellmann_feynman(spec, hp, tp, b);
  out.X2 = field.grid.dim >= 2 ? susceptibility_finite_difference(hp, tp, b, 2) : 0.0;
  if (cross_check) {
    Contour contour = build_contour(default_contour_params(spec.e.minCoeff(), tp),
                                    spec.e.minCoeff(), tp);
    double P_c = pressure_contour(hp, b, tp, contour);
    double denom = std::max(std::abs(out.P), 1e-12);
    if (std::abs(P_c - out.P) / denom > 1e-6) {
      std::ostringstream msg;
      msg << "path cross-check failed: eigensum P = " << out.P << " vs contour P = " << P_c;
      throw Error(msg.str());
    }
  }
  return out;
}

EnsembleStats run_convergence_sweep(const SweepPlan& plan) { return run_ladder(plan); }

EnsembleStats run_disorder_ensemble(const SweepPlan& plan) {
  if (plan.realizations < 30)
    throw Error("disorder ensemble: insufficient seeds (need >= 30 for variance estimates)");
  return run_ladder(plan);
}

double f_distribution_cdf(double x, double d1, double d2) {
  if (x <= 0.0) return 0.0;
  return betai(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

bool variance_decrease_significant(double var1, int n1, double var2, int n2, double alpha) {
  if (n1 < 2 || n2 < 2) throw Error("variance test: need at least 2 samples per group");
  if (var1 <= 0.0) return false;
  if (var2 <= 0.0) return true;
  double ratio = var2 / var1;
  return f_distribution_cdf(ratio, n2 - 1, n1 - 1) < alpha;
}

VectorXd local_pressure_density(const Spectrum& spec, const Grid& grid,
                                const ThermoParams& tp) {
  check_admissible(tp, spec.e.size() ? spec.e.minCoeff() : 0.0);
  const long long n = grid.nodes();
  const double hd = std::pow(grid.spacing(), grid.dim);
  VectorXd dens = VectorXd::Zero(n);
  for (long long j = 0; j < spec.e.size(); ++j) {
    double t = tp.z * std::exp(-tp.beta * spec.e[j]);
    if (t < 1e-18) continue;
    double g = tp.eps * std::log1p(tp.eps * t) / tp.beta;
    dens += g * spec.psi.col(j).cwiseAbs2();
  }
  return dens / hd;
}

ErgodicRecord run_ergodic_average(const PotentialModel& model, int dim, double big_L, double h,
                                  double window_w, double b, const ThermoParams& tp,
                                  int n_seeds, std::uint64_t base_seed) {
  if (!(window_w > 0.0)) throw Error("ergodic: window must be positive");
  if (big_L < 4.0 * window_w)
    throw Error("ergodic: interior margin violated (need big_L >= 4 window_w)");
  if (n_seeds < 2) throw Error("ergodic: need at least 2 seeds");
  Grid g = grid_for(big_L, h, dim);
  const long long n = g.nodes();
  const int cells_per_axis = static_cast<int>(std::lround(big_L / window_w));
  if (std::abs(cells_per_axis * window_w - big_L) > 1e-9)
    throw Error("ergodic: box side must be an integer number of windows");

  auto cell_of = [&](const Eigen::Vector3d& x) {
    long long c = 0;
    for (int a = dim - 1; a >= 0; --a) {
      int ca = static_cast<int>(std::floor((x[a] + big_L / 2.0) / window_w + 1e-12));
      ca = std::clamp(ca, 0, cells_per_axis - 1);
      c = c * cells_per_axis + ca;
    }
    return c;
  };
  auto cell_interior = [&](long long c) {
    const int margin = 1;  // one full window away from the boundary
    for (int a = 0; a < dim; ++a) {
      int ca = static_cast<int>(c % cells_per_axis);
      c /= cells_per_axis;
      if (ca < margin || ca >= cells_per_axis - margin) return false;
    }
    return true;
  };
  // cell containing the origin
  long long central = cell_of(Eigen::Vector3d::Zero());

  std::vector<double> central_vals(n_seeds);
  long long n_cells_total = 1;
  for (int a = 0; a < dim; ++a) n_cells_total *= cells_per_axis;

  std::vector<std::vector<double>> cell_sum_slots(n_seeds);
  par::run(n_seeds, [&](long s) {
    std::uint64_t seed = base_seed ^ static_cast<std::uint64_t>(s);
    PotentialField f = sample_model(g, model, seed);
    HamiltonianPolynomial hp = build_hamiltonian(g, f);
    Spectrum spec = eigensolve(hp.assemble(b));
    VectorXd dens = local_pressure_density(spec, g, tp);
    std::vector<double> sum(n_cells_total, 0.0);
    std::vector<long long> cnt(n_cells_total, 0);
    for (long long i = 0; i < n; ++i) {
      long long c = cell_of(g.coord(i));
      sum[c] += dens[i];
      ++cnt[c];
    }
    for (long long c = 0; c < n_cells_total; ++c)
      if (cnt[c] > 0) sum[c] /= cnt[c];
    central_vals[s] = sum[central];
    cell_sum_slots[s] = std::move(sum);
  });

  ErgodicRecord rec;
  // spatial statistics from the first realization
  for (long long c = 0; c < n_cells_total; ++c)
    if (cell_interior(c)) rec.cell_values.push_back(cell_sum_slots[0][c]);
  rec.n_cells = static_cast<int>(rec.cell_values.size());
  if (rec.n_cells < 2) throw Error("ergodic: fewer than 2 interior cells");
  double sm = 0.0;
  for (double v : rec.cell_values) sm += v;
  sm /= rec.n_cells;
  double sv = 0.0;
  for (double v : rec.cell_values) sv += (v - sm) * (v - sm);
  sv /= (rec.n_cells - 1);
  rec.spatial_mean = sm;
  rec.spatial_se = std::sqrt(sv / rec.n_cells);

  rec.n_seeds = n_seeds;
  double em = 0.0;
  for (double v : central_vals) em += v;
  em /= n_seeds;
  double ev = 0.0;
  for (double v : central_vals) ev += (v - em) * (v - em);
  ev /= (n_seeds - 1);
  rec.ensemble_mean = em;
  rec.ensemble_se = std::sqrt(ev / n_seeds);

  rec.gap = std::abs(rec.spatial_mean - rec.ensemble_mean);
  rec.combined_se = std::hypot(rec.spatial_se, rec.ensemble_se);
  return rec;
}

BoundaryRecord run_boundary_layer_probe(const PotentialModel& model, int dim,
                                        const std::vector<double>& L_ladder, double big_L,
                                        double h, double b, cplx xi, std::uint64_t seed) {
  if (L_ladder.empty()) throw Error("boundary probe: empty ladder");
  Grid big = grid_for(big_L, h, dim);
  const double hd = std::pow(h, dim);
  PotentialField big_field = sample_model(big, model, seed);
  HamiltonianPolynomial big_hp = build_hamiltonian(big, big_field);
  MatrixXcd R_big = resolvent(big_hp.assemble(b), xi);

  BoundaryRecord rec;
  for (double L : L_ladder) {
    if (L > big_L) throw Error("boundary probe: ladder box larger than the reference box");
    Grid small = grid_for(L, h, dim);
    double off_d = (big_L - L) / (2.0 * h);
    int off = static_cast<int>(std::lround(off_d));
    if (std::abs(off - off_d) > 1e-9)
      throw Error("boundary probe: non-nested grids ((big_L - L)/h must be even)");
    PotentialField f = sample_model(small, model, seed);
    HamiltonianPolynomial hp = build_hamiltonian(small, f);
    MatrixXcd R_s = resolvent(hp.assemble(b), xi);
    const long long ns = small.nodes();
    double integral = 0.0;
    std::vector<double> dmax;  // indexed by depth in units of h, 1-based
    for (long long i = 0; i < ns; ++i) {
      std::array<int, 3> m = small.unflatten(i);
      std::array<int, 3> mb = m;
      int depth_idx = small.n_per_side;
      for (int a = 0; a < dim; ++a) {
        mb[a] += off;
        depth_idx = std::min(depth_idx, std::min(m[a] + 1, small.n_per_side - m[a]));
      }
      double diff = std::abs(R_s(i, i) - R_big(big.flatten(mb), big.flatten(mb))) / hd;
      integral += diff * hd;
      if (static_cast<size_t>(depth_idx) > dmax.size()) dmax.resize(depth_idx, 0.0);
      dmax[depth_idx - 1] = std::max(dmax[depth_idx - 1], diff);
    }
    rec.Ls.push_back(L);
    rec.integrals.push_back(integral / std::pow(L, dim));
    if (L == L_ladder.back()) {
      for (size_t k = 0; k < dmax.size() && k < 8; ++k) {
        rec.depths.push_back((k + 1) * h);
        rec.depth_max.push_back(dmax[k]);
      }
      rec.depth_monotone = true;
      for (size_t k = 1; k + 1 < rec.depth_max.size(); ++k)
        if (rec.depth_max[k + 1] > rec.depth_max[k] * (1.0 + 1e-9)) rec.depth_monotone = false;
    }
  }
  if (rec.Ls.size() >= 2) {
    std::vector<double> xs, ys;
    for (size_t i = 0; i < rec.Ls.size(); ++i)
      if (rec.integrals[i] > 0.0) {
        xs.push_back(rec.Ls[i]);
        ys.push_back(rec.integrals[i]);
      }
    if (xs.size() >= 2) rec.fitted_exponent = loglog_slope(xs, ys);
  }
  return rec;
}

double dirichlet_green_diag_1d(double L, double x, double xi_real) {
  if (!(xi_real < 0.0)) throw Error("dirichlet_green_diag_1d: need xi < 0");
  double k = std::sqrt(-2.0 * xi_real);
  return 2.0 * std::sinh(k * (x + L / 2.0)) * std::sinh(k * (L / 2.0 - x)) /
         (k * std::sinh(k * L));
}

double free_pressure_1d_band(double h, const ThermoParams& tp) {
  tp.validate();
  const int n = 20000;  // composite Simpson, integrand analytic and bounded
  const double kmax = kPi / h;
  auto f = [&](double k) {
    double e = (2.0 / (h * h)) * std::pow(std::sin(0.5 * k * h), 2);
    double t = tp.z * std::exp(-tp.beta * e);
    return tp.eps * std::log1p(tp.eps * t);
  };
  double s = f(0.0) + f(kmax);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * kmax / n);
  double integral = s * (kmax / n) / 3.0;
  return integral / (tp.beta * kPi);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  if (cnt < 2) throw Error("loglog_slope: need at least 2 positive points");
  return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

}  // namespace diamag
