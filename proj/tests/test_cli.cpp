#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string bin() {
  const char* b = std::getenv("DIAMAG_BIN");
  REQUIRE_MESSAGE(b != nullptr, "DIAMAG_BIN must point at the CLI binary");
  return b;
}

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("diamag_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

int run(const std::string& args) {
  int rc = std::system((bin() + " " + args + " > /dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

fs::path only_subdir(const fs::path& root) {
  std::vector<fs::path> subs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) subs.push_back(e.path());
  REQUIRE(subs.size() == 1);
  return subs.front();
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// ledger lines with the trailing wall_time column removed
std::vector<std::string> ledger_sans_time(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream is(p);
  std::string line;
  while (std::getline(is, line)) out.push_back(line.substr(0, line.rfind(',')));
  return out;
}

const char* kToy =
    "[model]\ntype = toy\n[physics]\nbeta = 1\nz = 0.5\neps = 1\n";
const char* kSweep =
    "[model]\ntype = zero\n[grid]\ndim = 1\nh = 0.5\n[physics]\nb = 0\nbeta = 1\nz = 0.3\n"
    "[run]\nL_ladder = 8 16\nrealizations = 1\n";
const char* kEnsemble =
    "[model]\ntype = alloy\n[grid]\ndim = 2\nh = 1\n[physics]\nb = 0\nbeta = 1\nz = 0.3\n"
    "[run]\nL_ladder = 4 8\nrealizations = 30\nbase_seed = 1\n";

}  // namespace

TEST_CASE("thermo on the toy model reproduces the hand value") {
  fs::path d = fresh_dir("toy");
  write(d / "c.ini", kToy);
  CHECK(run("thermo --config " + (d / "c.ini").string() + " --out " + (d / "out").string()) ==
        0);
  fs::path outdir = only_subdir(d / "out");
  std::string ledger = slurp(outdir / "ledger.csv");
  CHECK(ledger.find("0.40546510810816438") != std::string::npos);  // ln(3/2)
  CHECK(slurp(outdir / "summary.txt").find("[FAIL]") == std::string::npos);
  CHECK(fs::exists(outdir / "manifest.json"));
}

TEST_CASE("identities in d=1 pass strictly") {
  fs::path d = fresh_dir("id");
  write(d / "c.ini",
        "[model]\ntype = alloy\ng = 0.7\n[grid]\ndim = 1\nL = 8\nn = 15\n"
        "[physics]\nb = 0.0 0.4\nbeta = 1\nz = 0.3\n");
  CHECK(run("identities --config " + (d / "c.ini").string() + " --out " +
            (d / "out").string()) == 0);
  std::string summary = slurp(only_subdir(d / "out") / "summary.txt");
  CHECK(summary.find("[PASS]") != std::string::npos);
  CHECK(summary.find("[FAIL]") == std::string::npos);
}

TEST_CASE("unknown configuration keys are a usage error") {
  fs::path d = fresh_dir("bad");
  write(d / "c.ini", "[model]\ntype = alloy\nbogus = 1\n");
  CHECK(run("thermo --config " + (d / "c.ini").string() + " --out " + (d / "out").string()) ==
        2);
}

TEST_CASE("reruns are byte-identical apart from timings") {
  fs::path d = fresh_dir("det");
  write(d / "c.ini", kSweep);
  std::string cfg = (d / "c.ini").string();
  REQUIRE(run("sweep --config " + cfg + " --out " + (d / "a").string()) == 0);
  REQUIRE(run("sweep --config " + cfg + " --out " + (d / "b").string()) == 0);
  fs::path la = only_subdir(d / "a") / "ledger.csv";
  fs::path lb = only_subdir(d / "b") / "ledger.csv";
  CHECK(ledger_sans_time(la) == ledger_sans_time(lb));
  // same config hash -> same directory name under both roots
  CHECK(only_subdir(d / "a").filename() == only_subdir(d / "b").filename());
}

TEST_CASE("export round-trips a sweep ledger into tables") {
  fs::path d = fresh_dir("exp");
  write(d / "c.ini", kSweep);
  REQUIRE(run("sweep --config " + (d / "c.ini").string() + " --out " + (d / "out").string()) ==
          0);
  fs::path ledger = only_subdir(d / "out") / "ledger.csv";
  write(d / "e.ini", std::string(kSweep) + "ledger = " + ledger.string() + "\n");
  CHECK(run("export --config " + (d / "e.ini").string() + " --out " + (d / "eo").string()) ==
        0);
  fs::path tables = only_subdir(d / "eo") / "tables";
  REQUIRE(fs::exists(tables));
  bool has_csv = false;
  for (const auto& e : fs::directory_iterator(tables))
    has_csv |= e.path().extension() == ".csv";
  CHECK(has_csv);
  // a missing ledger path is a usage error
  write(d / "m.ini", std::string(kSweep) + "ledger = " + (d / "nope.csv").string() + "\n");
  CHECK(run("export --config " + (d / "m.ini").string() + " --out " + (d / "mo").string()) ==
        2);
}

TEST_CASE("assert level controls the exit code of a failed assertion") {
  // the pinned ensemble violates the variance-decrease assertion for X2
  fs::path d = fresh_dir("al");
  write(d / "c.ini", kEnsemble);
  std::string cfg = (d / "c.ini").string();
  CHECK(run("ensemble --config " + cfg + " --out " + (d / "s").string()) == 1);
  CHECK(run("ensemble --config " + cfg + " --assert-level report-only --out " +
            (d / "r").string()) == 0);
  std::string summary = slurp(only_subdir(d / "s") / "summary.txt");
  CHECK(summary.find("[FAIL]") != std::string::npos);
}

TEST_CASE("seed override changes the realizations but not the schema") {
  fs::path d = fresh_dir("seed");
  write(d / "c.ini", kSweep);
  std::string cfg = (d / "c.ini").string();
  REQUIRE(run("sweep --config " + cfg + " --seed 9 --out " + (d / "a").string()) == 0);
  std::vector<std::string> rows = ledger_sans_time(only_subdir(d / "a") / "ledger.csv");
  CHECK(rows.size() >= 2);
  for (size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].find(",9,") != std::string::npos);
}
