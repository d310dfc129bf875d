#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <regex>
#include <set>
#include <sstream>
#include <string>

#include "qsdyn/csv.hpp"

namespace fs = std::filesystem;
using qsdyn::CsvTable;

namespace {

// A fresh directory per test case; runs the CLI there with stdout captured.
class Sandbox {
 public:
  explicit Sandbox(const std::string& name)
      : dir_(fs::temp_directory_path() / ("qsdyn_cli_test_" + name)) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  int run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = "cd '" + dir_.string() + "' && " + env + " '" QSDYN_CLI_PATH "' " +
                            args + " > stdout.txt 2> stderr.txt";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }

  std::string read(const std::string& file) const {
    std::ifstream in(dir_ / file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  CsvTable csv(const std::string& file) const {
    std::ifstream in(dir_ / file);
    REQUIRE(in);
    return qsdyn::read_csv(in);
  }

  bool exists(const std::string& file) const { return fs::exists(dir_ / file); }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
};

double num(const std::string& s) { return std::stod(s); }

}  // namespace

TEST_CASE("help and usage errors") {
  Sandbox box("usage");
  CHECK(box.run("--help") == 0);
  CHECK(box.read("stdout.txt").find("simulate") != std::string::npos);
  CHECK(box.run("section --help") == 0);
  CHECK(box.run("") == 2);
  CHECK(box.run("bogus") == 2);
  CHECK(box.run("simulate --f0 abc") == 2);
  CHECK(box.run("sweep --kind nothing") == 2);
}

TEST_CASE("configuration errors exit with 2") {
  Sandbox box("config");
  CHECK(box.run("simulate --Q 1.5") == 2);
  CHECK(box.read("stderr.txt").find("InvalidArgument") != std::string::npos);
  CHECK(box.run("equilibria --f0 -1") == 2);
  CHECK(box.run("simulate --x0 0.5 --x1 0.4") == 2);
  CHECK(box.run("section --axis f0Q --value 5") == 2);
  CHECK(box.run("simulate --out /proc/qsdyn_not_writable") == 2);
}

TEST_CASE("integrator failure exits with 3") {
  Sandbox box("numerical");
  CHECK(box.run("simulate --abs-tol 1e-3 --rel-tol 1e-3 --drift-tol 1e-17") == 3);
  CHECK(box.read("stderr.txt").find("DriftExceeded") != std::string::npos);
}

TEST_CASE("simulate from a fixed point stays put") {
  Sandbox box("fixed");
  REQUIRE(box.run("simulate --f0 0.3 --f1 2.1 --x0 0 --x1 0.125 --x2 0.875 --tmax 10 --sample 1") ==
          0);
  const CsvTable t = box.csv("orbit.csv");
  CHECK(t.header == std::vector<std::string>{"t", "x0", "x1", "x2"});
  REQUIRE(t.rows.size() == 11);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    CHECK(num(t.rows[r][0]) == doctest::Approx(static_cast<double>(r)));
    CHECK(std::abs(num(t.rows[r][2]) - 0.125) < 1e-12);
    CHECK(std::abs(num(t.rows[r][3]) - 0.875) < 1e-12);
  }
}

TEST_CASE("simulate reaches the mutator point") {
  Sandbox box("mutator");
  REQUIRE(box.run("simulate --f0 0.3 --f1 2.1 --tmax 1e4 --sample 5 --stop-distance 1e-2") == 0);
  const CsvTable t = box.csv("orbit.csv");
  const auto& last = t.rows.back();
  const double d = std::hypot(num(last[1]), num(last[2]) - 0.125, num(last[3]) - 0.875);
  CHECK(d < 1e-2);
  CHECK(num(last[0]) < 1e4);
  for (const auto& row : t.rows)
    CHECK(std::abs(num(row[1]) + num(row[2]) + num(row[3]) - 1.0) <= 1e-10);
}

TEST_CASE("equilibria as json") {
  Sandbox box("eqjson");
  REQUIRE(box.run("equilibria --format json") == 0);
  const auto j = nlohmann::json::parse(box.read("stdout.txt"));
  CHECK(j["params"]["f0Q"].get<double>() == doctest::Approx(0.63));
  CHECK(j["predicted_attractor"] == "FullCoexistence");
  REQUIRE(j["fixed_points"].size() == 3);
  const auto& full = j["fixed_points"][2];
  CHECK(full["exists"] == true);
  CHECK(full["coords"][0].get<double>() == doctest::Approx(0.0882 / 0.2772));
  CHECK(full["stability"] == "Attractor");
  CHECK(j["fixed_points"][0]["eigen_source"] == "analytic");
  CHECK(j["critical_mutation_rates"]["mu1"].get<double>() == doctest::Approx(0.4));

  REQUIRE(box.run("equilibria --f1 0.42 --format json") == 0);
  const auto d = nlohmann::json::parse(box.read("stdout.txt"));
  CHECK(d["fixed_points"][1]["status"] == "DegenerateFitness");
  CHECK(d["fixed_points"][0]["exists"] == true);
}

TEST_CASE("equilibria as text") {
  Sandbox box("eqtext");
  REQUIRE(box.run("equilibria --f0 0.9 --f1 2.1") == 0);
  const std::string out = box.read("stdout.txt");
  CHECK(out.find("[UnstableDominance]") != std::string::npos);
  CHECK(out.find("[FullCoexistence]") != std::string::npos);
  CHECK(out.find("none (bifurcation surface)") != std::string::npos);
  CHECK_FALSE(box.exists("orbit.csv"));
}

TEST_CASE("sweep writes one row per cell") {
  Sandbox box("sweep");
  REQUIRE(box.run("sweep --kind classify --step 0.3 --f0-min 0.3 --f0-max 1.2 --f1-min 0.3 "
                  "--f1-max 3.3 --tmax 2e3 --threads 2") == 0);
  const CsvTable t = box.csv("sweep_classify.csv");
  CHECK(t.header == qsdyn::grid_columns());
  CHECK(t.rows.size() == 4 * 11);
  std::set<std::string> outcomes;
  for (const auto& row : t.rows) {
    outcomes.insert(row[t.column("outcome")]);
    CHECK(row[t.column("error")].empty());
  }
  CHECK(outcomes.count("UnstableDominance"));
  CHECK(outcomes.count("MutatorCoexistence"));
  CHECK(outcomes.count("FullCoexistence"));

  REQUIRE(box.run("sweep --kind transients --f0-min 0.9 --f0-max 0.9 --f1-min 0.7 --f1-max 0.7") ==
          0);
  const CsvTable one = box.csv("sweep_transients.csv");
  REQUIRE(one.rows.size() == 1);
  CHECK(one.rows[0][one.column("outcome")] == "FullCoexistence");
  CHECK(num(one.rows[0][one.column("time")]) > 0.0);
}

TEST_CASE("equal fitness sweep embeds no errors") {
  Sandbox box("equalfit");
  REQUIRE(box.run("sweep --f1-min 0.42 --f1-max 0.42 --f0-min 0.05 --f0-max 1.4 --step 0.05 "
                  "--tmax 1e4") == 0);
  const CsvTable t = box.csv("sweep_classify.csv");
  CHECK(t.rows.size() == 28);
  for (const auto& row : t.rows) CHECK(row[t.column("error")].empty());
}

TEST_CASE("section with eigenvalues") {
  Sandbox box("section");
  REQUIRE(box.run("section --axis f0Q --value 0.63 --with-eigen --abscissa-step 0.01 "
                  "--f1-max 3.2667 --tmax 2e3 --emit-plots") == 0);
  const CsvTable t = box.csv("section_f0Q_classify.csv");
  CHECK(t.header == qsdyn::section_columns());
  CHECK(t.rows.size() == 98);
  int sign_changes = 0;
  double prev = 0.0;
  for (const auto& row : t.rows) {
    CHECK(num(row[t.column("f0Q")]) == doctest::Approx(0.63));
    const double l = num(row[t.column("lambda1")]);
    if (prev != 0.0 && (l > 0) != (prev > 0)) ++sign_changes;
    prev = l;
  }
  CHECK(sign_changes == 1);
  CHECK(box.exists("section_f0Q_classify.gp"));
}

TEST_CASE("plot scripts reference only emitted files and are stable") {
  Sandbox box("plots");
  const std::string args =
      "--emit-plots sweep --kind densities --step 0.2 --f0-min 0.2 --f0-max 1.4 --f1-min 0.2 "
      "--f1-max 1.4 --tmax 2e3";
  REQUIRE(box.run(args) == 0);
  const std::string first = box.read("sweep_densities.gp");
  REQUIRE(box.run(args) == 0);
  CHECK(box.read("sweep_densities.gp") == first);

  REQUIRE(box.run("--emit-plots simulate --tmax 5") == 0);
  for (const char* script : {"sweep_densities.gp", "orbit.gp"}) {
    const std::string text = box.read(script);
    const std::regex quoted("'([^']+\\.csv)'");
    int refs = 0;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), quoted);
         it != std::sregex_iterator(); ++it) {
      const std::string ref = (*it)[1];
      CHECK(fs::path(ref).is_relative());
      CHECK(box.exists(ref));
      ++refs;
    }
    CHECK(refs >= 1);
  }
}

TEST_CASE("config file supplies defaults and flags override it") {
  Sandbox box("cfgfile");
  {
    std::ofstream cfg(box.dir() / "run.ini");
    cfg << "f0 = 0.3\nf1 = 2.1\ntmax = 7\n";
  }
  REQUIRE(box.run("--config run.ini simulate --sample 1") == 0);
  CsvTable t = box.csv("orbit.csv");
  CHECK(num(t.rows.back()[0]) == doctest::Approx(7.0));

  REQUIRE(box.run("--config run.ini --tmax 3 simulate --sample 1") == 0);
  t = box.csv("orbit.csv");
  CHECK(num(t.rows.back()[0]) == doctest::Approx(3.0));

  CHECK(box.run("--config missing.ini simulate") == 2);
}

TEST_CASE("thread count from the environment does not change results") {
  Sandbox box("threads");
  const std::string args = "sweep --step 0.25 --f0-min 0.1 --f0-max 1.4 --f1-min 0.1 --f1-max 3.3 "
                           "--tmax 2e3";
  REQUIRE(box.run(args, "QSDYN_THREADS=1") == 0);
  const std::string one = box.read("sweep_classify.csv");
  REQUIRE(box.run(args, "QSDYN_THREADS=3") == 0);
  CHECK(box.read("sweep_classify.csv") == one);
  CHECK(box.run(args, "QSDYN_THREADS=abc") == 2);
}
