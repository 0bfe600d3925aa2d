#include "diamag/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace diamag {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string ledger_header() {
  return "model,seed,d,L,h,b,beta,z,eps,path,P,rho,X1,X2,X3,wall_time";
}

std::string format_row(const LedgerRow& r) {
  std::ostringstream os;
  os << r.model << ',' << r.seed << ',' << r.d << ',' << fmt(r.L) << ',' << fmt(r.h) << ','
     << fmt(r.b) << ',' << fmt(r.beta) << ',' << fmt(r.z) << ',' << r.eps << ',' << r.path
     << ',' << fmt(r.P) << ',' << fmt(r.rho) << ',' << fmt(r.X1) << ',' << fmt(r.X2) << ','
     << fmt(r.X3) << ',' << fmt(r.wall_time);
  return os.str();
}

Ledger::Ledger(const std::string& path) : path_(path) {
  if (!std::filesystem::exists(path_)) {
    std::ofstream os(path_);
    if (!os) throw Error("ledger: cannot create " + path_);
    os << ledger_header() << '\n';
  }
}

void Ledger::append(const LedgerRow& row) {
  std::ofstream os(path_, std::ios::app);
  if (!os) throw Error("ledger: cannot open " + path_);
  os << format_row(row) << '\n';
}

std::vector<LedgerRow> read_ledger(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("ledger: missing file " + path);
  std::string line;
  if (!std::getline(is, line) || line != ledger_header())
    throw Error("ledger: malformed header in " + path);
  std::vector<LedgerRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv(line);
    if (f.size() != 16) throw Error("ledger: malformed row in " + path);
    LedgerRow r;
    r.model = f[0];
    r.seed = std::stoull(f[1]);
    r.d = std::stoi(f[2]);
    r.L = std::stod(f[3]);
    r.h = std::stod(f[4]);
    r.b = std::stod(f[5]);
    r.beta = std::stod(f[6]);
    r.z = std::stod(f[7]);
    r.eps = std::stoi(f[8]);
    r.path = f[9];
    r.P = std::stod(f[10]);
    r.rho = std::stod(f[11]);
    r.X1 = std::stod(f[12]);
    r.X2 = std::stod(f[13]);
    r.X3 = std::stod(f[14]);
    r.wall_time = std::stod(f[15]);
    rows.push_back(r);
  }
  return rows;
}

void export_tables(const std::string& ledger_path, const std::string& out_dir) {
  std::vector<LedgerRow> rows = read_ledger(ledger_path);
  std::filesystem::create_directories(out_dir);

  struct Acc {
    int n = 0;
    double sum = 0, sumsq = 0;
    void add(double v) {
      ++n;
      sum += v;
      sumsq += v * v;
    }
    double mean() const { return n ? sum / n : 0.0; }
    double var() const {
      return n > 1 ? std::max(0.0, (sumsq - sum * sum / n) / (n - 1)) : 0.0;
    }
  };

  std::map<double, Acc> p_by_L, x2_by_L;
  std::map<double, Acc> x2_by_z;
  for (const LedgerRow& r : rows) {
    p_by_L[r.L].add(r.P);
    x2_by_L[r.L].add(r.X2);
    x2_by_z[r.z].add(r.X2);
  }

  {
    std::ofstream os(out_dir + "/p_vs_L.csv");
    os << "L,mean_P,se_P,n\n" << std::setprecision(17);
    for (const auto& [L, a] : p_by_L)
      os << L << ',' << a.mean() << ',' << std::sqrt(a.var() / std::max(a.n, 1)) << ',' << a.n
         << '\n';
  }
  {
    std::ofstream os(out_dir + "/var_vs_L.csv");
    os << "L,var_P,var_X2,n\n" << std::setprecision(17);
    for (const auto& [L, a] : p_by_L)
      os << L << ',' << a.var() << ',' << x2_by_L[L].var() << ',' << a.n << '\n';
  }
  {
    std::ofstream os(out_dir + "/x2_vs_z.csv");
    os << "z,mean_X2,se_X2,n\n" << std::setprecision(17);
    for (const auto& [z, a] : x2_by_z)
      os << z << ',' << a.mean() << ',' << std::sqrt(a.var() / std::max(a.n, 1)) << ',' << a.n
         << '\n';
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string model_name(const PotentialModel& m) {
  struct V {
    std::string operator()(const ZeroModel&) const { return "zero"; }
    std::string operator()(const AlloyModel&) const { return "alloy"; }
    std::string operator()(const PoissonModel&) const { return "poisson"; }
    std::string operator()(const PeriodicModel&) const { return "periodic"; }
    std::string operator()(const SparseBarrierModel&) const { return "sparse-barrier"; }
  };
  return std::visit(V{}, m);
}

}  // namespace diamag
