#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diamag/potentials.hpp"

namespace diamag {

// one observable record; X3 and unknown entries are written as nan
struct LedgerRow {
  std::string model = "zero";
  std::uint64_t seed = 0;
  int d = 1;
  double L = 0, h = 0, b = 0, beta = 0, z = 0;
  int eps = +1;
  std::string path = "eigensum";  // eigensum | contour | trace-formula |
                                  // finite-difference | hellmann-feynman
  double P = 0, rho = 0, X1 = 0, X2 = 0, X3 = 0, wall_time = 0;
};

std::string ledger_header();
std::string format_row(const LedgerRow& row);

// append-only CSV ledger; creates the file with a header on first use
class Ledger {
 public:
  explicit Ledger(const std::string& path);
  void append(const LedgerRow& row);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::vector<LedgerRow> read_ledger(const std::string& path);

// plot-ready per-figure tables derived from a ledger:
//   p_vs_L.csv, var_vs_L.csv, x2_vs_z.csv  (header-only when the ledger is empty)
void export_tables(const std::string& ledger_path, const std::string& out_dir);

// FNV-1a content hash (used for content-addressed output directories)
std::uint64_t fnv1a(const std::string& s);

std::string model_name(const PotentialModel& m);

}  // namespace diamag
