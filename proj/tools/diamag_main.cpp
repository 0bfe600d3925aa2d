// diamag: configuration-driven runs of the finite-volume diamagnetism
// laboratory.  Commands: thermo, identities, contour-check, sweep, ensemble,
// ergodic, boundary, export.  Exit 0 = all assertions pass, 1 = numerical
// assertion failure, 2 = configuration error.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "diamag/contour.hpp"
#include "diamag/experiments.hpp"
#include "diamag/ledger.hpp"
#include "diamag/parallel.hpp"
#include "diamag/response.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace diamag;

namespace {

constexpr const char* kVersion = "1.2.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- config ----

using Ini = std::map<std::string, std::map<std::string, std::string>>;

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

Ini parse_ini(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  Ini ini;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError("empty section name at line " + std::to_string(lineno));
      ini[section];
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    if (section.empty()) throw ConfigError("key outside any section at line " + std::to_string(lineno));
    std::string key = trim(t.substr(0, eq)), val = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key at line " + std::to_string(lineno));
    if (ini[section].count(key)) throw ConfigError("duplicate key " + section + "." + key);
    ini[section][key] = val;
  }
  return ini;
}

const std::map<std::string, std::set<std::string>> kSchema = {
    {"model",
     {"type", "g", "law", "degenerate_value", "lambda", "alpha", "spacing", "height_scale",
      "force_origin", "profile", "profile_radius", "profile_width", "profile_height"}},
    {"grid", {"dim", "L", "n", "h"}},
    {"physics", {"b", "beta", "z", "eps", "qc_ratio"}},
    {"contour", {"theta", "sigma", "nodes_per_segment", "panel_factor", "E_K", "xi_K", "re_max"}},
    {"run",
     {"realizations", "base_seed", "L_ladder", "big_L", "window", "xi_re", "xi_im", "ledger",
      "cross_check"}},
};

void validate_schema(const Ini& ini) {
  for (const auto& [sec, kv] : ini) {
    auto it = kSchema.find(sec);
    if (it == kSchema.end()) throw ConfigError("unknown config section [" + sec + "]");
    for (const auto& [k, v] : kv)
      if (!it->second.count(k)) throw ConfigError("unknown config key " + sec + "." + k);
  }
}

struct Cfg {
  Ini ini;

  bool has(const std::string& sec, const std::string& key) const {
    auto s = ini.find(sec);
    return s != ini.end() && s->second.count(key);
  }
  std::string str(const std::string& sec, const std::string& key, const std::string& dflt) const {
    return has(sec, key) ? ini.at(sec).at(key) : dflt;
  }
  std::string require(const std::string& sec, const std::string& key) const {
    if (!has(sec, key)) throw ConfigError("missing required config key " + sec + "." + key);
    return ini.at(sec).at(key);
  }
  double num(const std::string& sec, const std::string& key, double dflt) const {
    if (!has(sec, key)) return dflt;
    try {
      size_t pos = 0;
      double v = std::stod(ini.at(sec).at(key), &pos);
      if (pos != ini.at(sec).at(key).size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key " + sec + "." + key + " is not a number");
    }
  }
  int integer(const std::string& sec, const std::string& key, int dflt) const {
    double v = num(sec, key, dflt);
    if (v != std::floor(v)) throw ConfigError("config key " + sec + "." + key + " must be an integer");
    return static_cast<int>(v);
  }
  bool boolean(const std::string& sec, const std::string& key, bool dflt) const {
    std::string v = str(sec, key, dflt ? "true" : "false");
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key " + sec + "." + key + " must be true/false");
  }
  std::vector<double> list(const std::string& sec, const std::string& key,
                           std::vector<double> dflt) const {
    if (!has(sec, key)) return dflt;
    std::istringstream is(ini.at(sec).at(key));
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    if (!is.eof()) throw ConfigError("config key " + sec + "." + key + " is not a number list");
    if (out.empty()) throw ConfigError("config key " + sec + "." + key + " is empty");
    return out;
  }
};

SingleSiteProfile profile_from(const Cfg& c, SingleSiteProfile dflt) {
  if (!c.has("model", "profile")) return dflt;
  std::string kind = c.require("model", "profile");
  double radius = c.num("model", "profile_radius", 1.0);
  double height = c.num("model", "profile_height", 1.0);
  if (kind == "gaussian")
    return SingleSiteProfile::gaussian(radius, c.num("model", "profile_width", 0.35), height);
  if (kind == "box") return SingleSiteProfile::box(radius, height);
  if (kind == "cosine") return SingleSiteProfile::cosine(radius, height);
  if (kind == "zero") return SingleSiteProfile::zero();
  throw ConfigError("unknown profile kind: " + kind);
}

CouplingLaw law_from(const std::string& s) {
  if (s == "uniform") return CouplingLaw::Uniform;
  if (s == "degenerate") return CouplingLaw::Degenerate;
  if (s == "rademacher") return CouplingLaw::Rademacher;
  throw ConfigError("unknown coupling law: " + s);
}

PotentialModel model_from(const Cfg& c) {
  std::string type = c.str("model", "type", "zero");
  if (type == "zero") return ZeroModel{};
  if (type == "alloy") {
    AlloyModel m;
    m.g = c.num("model", "g", m.g);
    m.law = law_from(c.str("model", "law", "uniform"));
    m.degenerate_value = c.num("model", "degenerate_value", m.degenerate_value);
    m.profile = profile_from(c, m.profile);
    return m;
  }
  if (type == "poisson") {
    PoissonModel m;
    m.lambda = c.num("model", "lambda", m.lambda);
    m.profile = profile_from(c, m.profile);
    return m;
  }
  if (type == "periodic") {
    PeriodicModel m;
    m.profile = profile_from(c, m.profile);
    return m;
  }
  if (type == "sparse-barrier") {
    SparseBarrierModel m;
    m.alpha = c.num("model", "alpha", m.alpha);
    m.spacing = c.integer("model", "spacing", m.spacing);
    m.height_scale = c.num("model", "height_scale", m.height_scale);
    m.force_origin = c.boolean("model", "force_origin", m.force_origin);
    m.profile = profile_from(c, m.profile);
    return m;
  }
  throw ConfigError("unknown model type: " + type);
}

Grid grid_from(const Cfg& c) {
  int dim = c.integer("grid", "dim", 2);
  double L = c.num("grid", "L", 8.0);
  if (c.has("grid", "n")) return make_grid(dim, L, c.integer("grid", "n", 0));
  return grid_for(L, c.num("grid", "h", 1.0), dim);
}

ThermoParams thermo_from(const Cfg& c) {
  ThermoParams tp;
  tp.beta = c.num("physics", "beta", tp.beta);
  tp.z = c.num("physics", "z", tp.z);
  tp.eps = c.integer("physics", "eps", tp.eps);
  tp.qc_ratio = c.num("physics", "qc_ratio", tp.qc_ratio);
  tp.validate();
  return tp;
}

ContourParams contour_from(const Cfg& c, double floor_e, const ThermoParams& tp) {
  ContourParams cp = default_contour_params(floor_e, tp);
  cp.theta = c.num("contour", "theta", cp.theta);
  cp.sigma = c.num("contour", "sigma", cp.sigma);
  cp.nodes_per_segment = c.integer("contour", "nodes_per_segment", cp.nodes_per_segment);
  cp.panel_factor = c.num("contour", "panel_factor", cp.panel_factor);
  cp.E_K = c.num("contour", "E_K", cp.E_K);
  cp.xi_K = c.num("contour", "xi_K", cp.xi_K);
  cp.re_max = c.num("contour", "re_max", cp.re_max);
  return cp;
}

// ---------------------------------------------------------------- report ----

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::vector<Assertion> assertions;
  std::vector<std::string> info;

  void check(const std::string& name, bool ok, const std::string& detail) {
    assertions.push_back({name, ok, detail});
  }
  void note(const std::string& line) { info.push_back(line); }
  bool all_pass() const {
    for (const auto& a : assertions)
      if (!a.pass) return false;
    return true;
  }
  void write(std::ostream& os) const {
    for (const auto& a : assertions)
      os << (a.pass ? "[PASS] " : "[FAIL] ") << a.name << ": " << a.detail << "\n";
    for (const auto& s : info) os << "[info] " << s << "\n";
  }
};

double wall_now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmtg(double v, int prec = 12) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

// ------------------------------------------------------------- commands -----

struct RunContext {
  Cfg cfg;
  std::string out_dir;
  std::uint64_t seed = 0;  // --seed override; 0 means "use config"
  Report report;
};

// each run owns its ledger; a rerun of the same config rewrites it identically
Ledger fresh_ledger(const RunContext& rc) {
  fs::remove(rc.out_dir + "/ledger.csv");
  return Ledger(rc.out_dir + "/ledger.csv");
}

std::uint64_t base_seed_of(const RunContext& rc) {
  return rc.seed ? rc.seed
                 : static_cast<std::uint64_t>(rc.cfg.num("run", "base_seed", 1.0));
}

LedgerRow row_template(const RunContext& rc, const Grid& g, const ThermoParams& tp, double b) {
  LedgerRow r;
  r.model = model_name(model_from(rc.cfg));
  r.seed = base_seed_of(rc);
  r.d = g.dim;
  r.L = g.side;
  r.h = g.spacing();
  r.b = b;
  r.beta = tp.beta;
  r.z = tp.z;
  r.eps = tp.eps;
  return r;
}

void cmd_thermo(RunContext& rc) {
  ThermoParams tp = thermo_from(rc.cfg);
  Ledger ledger = fresh_ledger(rc);
  const double nan = std::nan("");

  if (rc.cfg.str("model", "type", "zero") == "toy") {
    // bundled one-eigenvalue toy: H = [0] on a unit cell
    double t0 = wall_now();
    VectorXd e = VectorXd::Zero(1);
    LedgerRow r;
    r.model = "toy";
    r.d = 1;
    r.L = 1.0;
    r.h = 1.0;
    r.beta = tp.beta;
    r.z = tp.z;
    r.eps = tp.eps;
    r.path = "eigensum";
    r.P = pressure_eigensum(e, tp, 1.0);
    r.rho = density_eigensum(e, tp, 1.0);
    r.X1 = nan;
    r.X2 = nan;
    r.X3 = nan;
    r.wall_time = wall_now() - t0;
    ledger.append(r);
    rc.report.check("toy pressure finite", std::isfinite(r.P), "P = " + fmtg(r.P, 17));
    return;
  }

  Grid g = grid_from(rc.cfg);
  PotentialField f = sample_model(g, model_from(rc.cfg), base_seed_of(rc));
  HamiltonianPolynomial hp = build_hamiltonian(g, f);
  for (double b : rc.cfg.list("physics", "b", {0.0})) {
    double t0 = wall_now();
    Spectrum spec = eigensolve(hp.assemble(b));
    Contour contour =
        build_contour(contour_from(rc.cfg, spec.e.minCoeff(), tp), spec.e.minCoeff(), tp);

    LedgerRow r = row_template(rc, g, tp, b);
    r.P = pressure_eigensum(spec.e, tp, g.volume());
    r.rho = density_eigensum(spec.e, tp, g.volume());
    r.X1 = nan;
    r.X2 = nan;
    r.X3 = nan;
    r.path = "eigensum";
    r.wall_time = wall_now() - t0;
    ledger.append(r);

    t0 = wall_now();
    LedgerRow rc2 = r;
    rc2.path = "contour";
    rc2.P = pressure_contour(hp, b, tp, contour);
    rc2.rho = nan;
    rc2.wall_time = wall_now() - t0;
    ledger.append(rc2);

    t0 = wall_now();
    LedgerRow rh = r;
    rh.path = "hellmann-feynman";
    rh.P = nan;
    rh.rho = nan;
    rh.X1 = magnetization_hellmann_feynman(spec, hp, tp, b);
    rh.wall_time = wall_now() - t0;
    ledger.append(rh);

    t0 = wall_now();
    LedgerRow rt = r;
    rt.path = "trace-formula";
    rt.P = nan;
    rt.rho = nan;
    rt.X1 = nan;
    rt.X2 = g.dim >= 2 ? susceptibility_quadratic_response(spec, hp, tp, b) : 0.0;
    rt.wall_time = wall_now() - t0;
    ledger.append(rt);

    t0 = wall_now();
    LedgerRow rf = r;
    rf.path = "finite-difference";
    rf.P = nan;
    rf.rho = nan;
    rf.X1 = g.dim >= 2 ? susceptibility_finite_difference(hp, tp, b, 1) : 0.0;
    rf.X2 = g.dim >= 2 ? susceptibility_finite_difference(hp, tp, b, 2) : 0.0;
    rf.wall_time = wall_now() - t0;
    ledger.append(rf);

    std::string tag = " (b = " + fmtg(b, 6) + ")";
    double pden = std::max(std::abs(r.P), 1e-12);
    rc.report.check("pressure path agreement" + tag,
                    std::abs(rc2.P - r.P) / pden <= 1e-8,
                    "eigensum " + fmtg(r.P, 17) + " vs contour " + fmtg(rc2.P, 17));
    if (g.dim >= 2) {
      double xden = std::max(std::abs(rh.X1), 1e-12);
      rc.report.check("magnetization path agreement" + tag,
                      std::abs(rf.X1 - rh.X1) / xden <= 1e-6,
                      "hellmann-feynman " + fmtg(rh.X1, 17) + " vs finite-difference " +
                          fmtg(rf.X1, 17));
      double x2den = std::max(std::abs(rt.X2), 1e-12);
      rc.report.check("susceptibility path agreement" + tag,
                      std::abs(rf.X2 - rt.X2) / x2den <= 1e-5,
                      "trace-formula " + fmtg(rt.X2, 17) + " vs finite-difference " +
                          fmtg(rf.X2, 17));
    }
  }
}

void cmd_identities(RunContext& rc) {
  ThermoParams tp = thermo_from(rc.cfg);
  Grid g = grid_from(rc.cfg);
  PotentialField f = sample_model(g, model_from(rc.cfg), base_seed_of(rc));
  HamiltonianPolynomial hp = build_hamiltonian(g, f);

  MatrixXd phi = phase_matrix(g);
  double phi_antisym = (phi + phi.transpose()).cwiseAbs().maxCoeff();
  rc.report.check("gauge phase antisymmetry", phi_antisym == 0.0,
                  "max |phi(x,y) + phi(y,x)| = " + fmtg(phi_antisym));

  for (double b : rc.cfg.list("physics", "b", {0.0, 0.5})) {
    std::string tag = " (b = " + fmtg(b, 6) + ")";
    Spectrum spec = eigensolve(hp.assemble(b));
    double floor_e = spec.e.minCoeff();
    cplx xi(rc.cfg.num("run", "xi_re", floor_e - 1.0), rc.cfg.num("run", "xi_im", 0.0));
    check_admissible(tp, floor_e);
    MatrixXcd R = resolvent(hp.assemble(b), xi);
    TOperators T = build_T_operators(hp, b, xi, R);

    double t1_diag = T.T1.diagonal().cwiseAbs().maxCoeff();
    rc.report.check("kernel operator diagonal vanishes" + tag, t1_diag == 0.0,
                    "max |T1(x,x)| = " + fmtg(t1_diag));

    MatrixXcd G1 = kernel_derivative_gauge_form(hp, b, xi, 1);
    MatrixXcd D1 = derivative_expansion(hp, b, R, 1);
    double diag_dev = (G1 - D1).diagonal().cwiseAbs().maxCoeff();
    double scale = std::max(1.0, D1.cwiseAbs().maxCoeff());
    if (g.dim == 1 || b == 0.0) {
      rc.report.check("kernel derivative identity, diagonal" + tag, diag_dev <= 1e-10 * scale,
                      "max diag deviation = " + fmtg(diag_dev));
    } else {
      rc.report.note("diagonal kernel derivative deviation" + tag + " = " + fmtg(diag_dev) +
                     " (decays with h away from b = 0)");
    }

    double offdiag_dev = (G1 - D1).cwiseAbs().maxCoeff();
    double t1_dev = t1_product_identity_deviation(hp, b, R, T);
    if (g.dim == 1) {
      rc.report.check("kernel derivative identity, off-diagonal" + tag, offdiag_dev == 0.0,
                      "max deviation = " + fmtg(offdiag_dev));
      rc.report.check("momentum product identity" + tag, t1_dev == 0.0,
                      "max deviation = " + fmtg(t1_dev));
      double w_norm = hp.W.cwiseAbs().maxCoeff();
      double h2_norm = hp.h2.cwiseAbs().maxCoeff();
      rc.report.check("field independence in d=1" + tag, w_norm == 0.0 && h2_norm == 0.0,
                      "|W| = " + fmtg(w_norm) + ", |H2| = " + fmtg(h2_norm));
    } else {
      rc.report.note("off-diagonal kernel derivative deviation" + tag + " = " +
                     fmtg(offdiag_dev) + " (decays with h)");
      rc.report.note("momentum product identity deviation" + tag + " = " + fmtg(t1_dev) +
                     " (decays with h)");
    }
  }
}

void cmd_contour_check(RunContext& rc) {
  ThermoParams tp = thermo_from(rc.cfg);
  Grid g = grid_from(rc.cfg);
  PotentialField f = sample_model(g, model_from(rc.cfg), base_seed_of(rc));
  HamiltonianPolynomial hp = build_hamiltonian(g, f);
  Ledger ledger = fresh_ledger(rc);
  const double nan = std::nan("");

  for (double b : rc.cfg.list("physics", "b", {0.0})) {
    std::string tag = " (b = " + fmtg(b, 6) + ")";
    Spectrum spec = eigensolve(hp.assemble(b));
    double floor_e = spec.e.minCoeff();
    ContourParams cp = contour_from(rc.cfg, floor_e, tp);
    Contour contour;
    try {
      contour = build_contour(cp, floor_e, tp);
    } catch (const Error& e) {
      rc.report.check("contour validation" + tag, false, e.what());
      continue;
    }
    rc.report.check("contour validation" + tag, true,
                    std::to_string(contour.xi.size()) + " nodes, clearance " +
                        fmtg(contour.eta, 6) + ", tail bound " + fmtg(contour.tail, 6));

    double t0 = wall_now();
    double resid = 0.0;
    double P_c = pressure_contour(hp, b, tp, contour, &resid);
    double P_e = pressure_eigensum(spec.e, tp, g.volume());
    double dt = wall_now() - t0;
    rc.report.check("pressure path agreement" + tag,
                    std::abs(P_c - P_e) / std::max(std::abs(P_e), 1e-12) <= 1e-8,
                    "contour " + fmtg(P_c, 17) + " vs eigensum " + fmtg(P_e, 17));
    rc.report.check("quadrature imaginary residual" + tag, resid <= 1e-8,
                    "residual = " + fmtg(resid));

    ContourParams cp2 = cp;
    cp2.nodes_per_segment *= 2;
    double P_c2 = pressure_contour(hp, b, tp, build_contour(cp2, floor_e, tp));
    rc.report.check("node-doubling convergence" + tag, std::abs(P_c2 - P_c) <= 1e-10,
                    "|delta P| = " + fmtg(std::abs(P_c2 - P_c)));

    LedgerRow r = row_template(rc, g, tp, b);
    r.path = "contour";
    r.P = P_c;
    r.rho = nan;
    r.X1 = nan;
    r.X2 = nan;
    r.X3 = nan;
    r.wall_time = dt;
    ledger.append(r);

    std::ofstream cs(rc.out_dir + "/contour_b" + fmtg(b, 6) + ".csv");
    dump_contour_csv(contour, cs);
  }
}

SweepPlan plan_from(const RunContext& rc) {
  SweepPlan plan;
  plan.model = model_from(rc.cfg);
  plan.dim = rc.cfg.integer("grid", "dim", 2);
  plan.h = rc.cfg.num("grid", "h", 1.0);
  plan.L_ladder = rc.cfg.list("run", "L_ladder", {8.0, 16.0});
  plan.b = rc.cfg.list("physics", "b", {0.0}).front();
  plan.tp = thermo_from(rc.cfg);
  plan.realizations = rc.cfg.integer("run", "realizations", 1);
  plan.base_seed = base_seed_of(rc);
  plan.cross_check = rc.cfg.boolean("run", "cross_check", true);
  return plan;
}

void append_ensemble_rows(const RunContext& rc, const SweepPlan& plan, const EnsembleStats& st) {
  Ledger ledger = fresh_ledger(rc);
  const double nan = std::nan("");
  for (const LStats& s : st.per_L) {
    for (size_t r = 0; r < s.raw.size(); ++r) {
      LedgerRow row;
      row.model = model_name(plan.model);
      row.seed = plan.base_seed ^ static_cast<std::uint64_t>(r);
      row.d = plan.dim;
      row.L = s.L;
      row.h = plan.h;
      row.b = plan.b;
      row.beta = plan.tp.beta;
      row.z = plan.tp.z;
      row.eps = plan.tp.eps;
      row.path = "eigensum";
      row.P = s.raw[r].P;
      row.rho = nan;
      row.X1 = s.raw[r].X1;
      row.X2 = s.raw[r].X2;
      row.X3 = nan;
      row.wall_time = 0.0;
      ledger.append(row);
    }
  }
  std::ofstream os(rc.out_dir + "/stats.csv");
  os << "L,n_seeds,mean_P,var_P,se_P,mean_X1,var_X1,se_X1,mean_X2,var_X2,se_X2\n"
     << std::setprecision(17);
  for (const LStats& s : st.per_L)
    os << s.L << ',' << s.n_seeds << ',' << s.mean_P << ',' << s.var_P << ',' << s.se_P << ','
       << s.mean_X1 << ',' << s.var_X1 << ',' << s.se_X1 << ',' << s.mean_X2 << ',' << s.var_X2
       << ',' << s.se_X2 << '\n';
}

void cmd_sweep(RunContext& rc) {
  SweepPlan plan = plan_from(rc);
  EnsembleStats st = run_convergence_sweep(plan);
  append_ensemble_rows(rc, plan, st);
  rc.report.check("per-seed path cross-check", true,
                  plan.cross_check ? "eigensum vs contour within 1e-6 on every run"
                                   : "disabled by config");
  if (st.per_L.size() >= 3)
    rc.report.note("successive-difference decay rate = " + fmtg(st.diff_decay_rate, 6));
  if (st.has_free_reference) {
    double ref = st.free_reference;
    double last = st.per_L.back().mean_P;
    rc.report.note("infinite-chain band-integral reference P = " + fmtg(ref, 12) +
                   ", largest-box P = " + fmtg(last, 12));
  }
  export_tables(rc.out_dir + "/ledger.csv", rc.out_dir + "/tables");
}

void cmd_ensemble(RunContext& rc) {
  SweepPlan plan = plan_from(rc);
  EnsembleStats st = run_disorder_ensemble(plan);
  append_ensemble_rows(rc, plan, st);
  for (size_t i = 0; i + 1 < st.per_L.size(); ++i) {
    const LStats& a = st.per_L[i];
    const LStats& b = st.per_L[i + 1];
    std::string pair = fmtg(a.L, 6) + " -> " + fmtg(b.L, 6);
    rc.report.check(
        "self-averaging of P, L = " + pair,
        variance_decrease_significant(a.var_P, a.n_seeds, b.var_P, b.n_seeds),
        "Var[P]: " + fmtg(a.var_P, 6) + " -> " + fmtg(b.var_P, 6));
    rc.report.check(
        "self-averaging of X2, L = " + pair,
        variance_decrease_significant(a.var_X2, a.n_seeds, b.var_X2, b.n_seeds),
        "Var[X2]: " + fmtg(a.var_X2, 6) + " -> " + fmtg(b.var_X2, 6));
  }
  export_tables(rc.out_dir + "/ledger.csv", rc.out_dir + "/tables");
}

void cmd_ergodic(RunContext& rc) {
  ThermoParams tp = thermo_from(rc.cfg);
  double big_L = rc.cfg.num("run", "big_L", 8.0);
  double window = rc.cfg.num("run", "window", 1.0);
  double h = rc.cfg.num("grid", "h", 0.5);
  int dim = rc.cfg.integer("grid", "dim", 2);
  int seeds = rc.cfg.integer("run", "realizations", 40);
  double b = rc.cfg.list("physics", "b", {0.0}).front();
  ErgodicRecord rec = run_ergodic_average(model_from(rc.cfg), dim, big_L, h, window, b, tp,
                                          seeds, base_seed_of(rc));
  rc.report.check("spatial vs ensemble average",
                  rec.gap <= 3.0 * rec.combined_se,
                  "gap = " + fmtg(rec.gap, 6) + ", 3 x combined SE = " +
                      fmtg(3.0 * rec.combined_se, 6) + " (" + std::to_string(rec.n_cells) +
                      " cells, " + std::to_string(rec.n_seeds) + " seeds)");
  std::ofstream os(rc.out_dir + "/cells.csv");
  os << "cell,value\n" << std::setprecision(17);
  for (size_t i = 0; i < rec.cell_values.size(); ++i) os << i << ',' << rec.cell_values[i] << '\n';
  std::ofstream ss(rc.out_dir + "/ergodic.csv");
  ss << "spatial_mean,spatial_se,ensemble_mean,ensemble_se,gap,combined_se\n"
     << std::setprecision(17) << rec.spatial_mean << ',' << rec.spatial_se << ','
     << rec.ensemble_mean << ',' << rec.ensemble_se << ',' << rec.gap << ',' << rec.combined_se
     << '\n';
}

void cmd_boundary(RunContext& rc) {
  double big_L = rc.cfg.num("run", "big_L", 24.0);
  double h = rc.cfg.num("grid", "h", 1.0);
  int dim = rc.cfg.integer("grid", "dim", 2);
  std::vector<double> ladder = rc.cfg.list("run", "L_ladder", {8.0, 12.0, 16.0});
  double b = rc.cfg.list("physics", "b", {0.0}).front();
  cplx xi(rc.cfg.num("run", "xi_re", -1.0), rc.cfg.num("run", "xi_im", 0.0));
  BoundaryRecord rec = run_boundary_layer_probe(model_from(rc.cfg), dim, ladder, big_L, h, b, xi,
                                                base_seed_of(rc));
  rc.report.check("boundary-layer volume scaling",
                  rec.fitted_exponent >= -1.3 && rec.fitted_exponent <= -0.7,
                  "fitted exponent = " + fmtg(rec.fitted_exponent, 6) + " (surface/volume -1)");
  rc.report.check("boundary-layer depth decay", rec.depth_monotone,
                  "max kernel difference non-increasing into the bulk");
  std::ofstream os(rc.out_dir + "/boundary.csv");
  os << "L,integral\n" << std::setprecision(17);
  for (size_t i = 0; i < rec.Ls.size(); ++i) os << rec.Ls[i] << ',' << rec.integrals[i] << '\n';
  std::ofstream ds(rc.out_dir + "/depth.csv");
  ds << "depth,max_diff\n" << std::setprecision(17);
  for (size_t i = 0; i < rec.depths.size(); ++i)
    ds << rec.depths[i] << ',' << rec.depth_max[i] << '\n';
}

void cmd_export(RunContext& rc) {
  std::string ledger = rc.cfg.str("run", "ledger", "");
  if (ledger.empty()) throw ConfigError("export requires run.ledger = <path>");
  if (!fs::exists(ledger)) throw ConfigError("export: missing ledger " + ledger);
  export_tables(ledger, rc.out_dir + "/tables");
  rc.report.note("tables written from " + ledger);
}

// ----------------------------------------------------------------- main -----

std::string canonical_config(const std::string& command, const Ini& ini, std::uint64_t seed) {
  std::ostringstream os;
  os << command << '\n' << "seed=" << seed << '\n';
  for (const auto& [sec, kv] : ini) {
    os << '[' << sec << "]\n";
    for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
  }
  return os.str();
}

void write_manifest(const RunContext& rc, const std::string& command, std::uint64_t hash,
                    const std::string& assert_level) {
  json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["config_hash"] = hash;
  j["threads"] = par::threads();
  j["assert_level"] = assert_level;
  j["base_seed"] = base_seed_of(rc);
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  j["generated_at"] = buf;
  json cfg = json::object();
  for (const auto& [sec, kv] : rc.cfg.ini) {
    json s = json::object();
    for (const auto& [k, v] : kv) s[k] = v;
    cfg[sec] = s;
  }
  j["config"] = cfg;
  std::ofstream os(rc.out_dir + "/manifest.json");
  os << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-volume diamagnetism laboratory"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path, out_base = "runs", assert_level = "strict";
  std::uint64_t seed = 0;
  int threads = 0;
  app.add_option("--config", config_path, "INI-style run configuration")->required();
  app.add_option("--seed", seed, "base seed override (nonzero)");
  app.add_option("--threads", threads, "worker threads (fallback: DIAMAG_THREADS)");
  app.add_option("--out", out_base, "output root directory");
  app.add_option("--assert-level", assert_level, "strict | report-only")
      ->check(CLI::IsMember({"strict", "report-only"}));

  const std::map<std::string, void (*)(RunContext&)> commands = {
      {"thermo", cmd_thermo},   {"identities", cmd_identities},
      {"contour-check", cmd_contour_check}, {"sweep", cmd_sweep},
      {"ensemble", cmd_ensemble}, {"ergodic", cmd_ergodic},
      {"boundary", cmd_boundary}, {"export", cmd_export}};
  for (const auto& [name, fn] : commands) app.add_subcommand(name);

  CLI11_PARSE(app, argc, argv);
  std::string command = app.get_subcommands().front()->get_name();

  RunContext rc;
  try {
    rc.cfg.ini = parse_ini(config_path);
    validate_schema(rc.cfg.ini);
    rc.seed = seed;
    if (threads > 0) par::set_threads(threads);

    std::uint64_t hash = fnv1a(canonical_config(command, rc.cfg.ini, seed));
    std::ostringstream dir;
    dir << out_base << '/' << command << '-' << std::hex << std::setw(16) << std::setfill('0')
        << hash;
    rc.out_dir = dir.str();
    fs::create_directories(rc.out_dir);
    write_manifest(rc, command, hash, assert_level);

    commands.at(command)(rc);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  rc.report.write(std::cout);
  std::ofstream summary(rc.out_dir + "/summary.txt");
  rc.report.write(summary);
  if (!rc.report.all_pass() && assert_level == "strict") return 1;
  return 0;
}
