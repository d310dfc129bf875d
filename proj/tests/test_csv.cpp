#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <clocale>
#include <cmath>
#include <sstream>

#include "qsdyn/csv.hpp"
#include "support.hpp"

using namespace qsdyn;

namespace {

SweepSpec small_spec() {
  SweepSpec s;
  s.f0 = {0.3, 0.9, 0.3};
  s.f1 = {0.7, 2.1, 0.7};
  s.integrator.t_max = 2e3;
  return s;
}

CsvTable reparse(const std::string& text) {
  std::istringstream is(text);
  return read_csv(is);
}

}  // namespace

TEST_CASE("format_double round-trips") {
  qstest::Rng rng(3);
  for (int k = 0; k < 2000; ++k) {
    const double v = rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-30.0, 30.0));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(std::nan("")).empty());
}

TEST_CASE("format_double ignores the C locale") {
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = old ? old : "C";
  if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8")) {
    CHECK(format_double(0.5) == "0.5");
    std::setlocale(LC_NUMERIC, saved.c_str());
  }
  CHECK(format_double(1234567.25) == "1234567.25");
}

TEST_CASE("grid CSV re-parses with the declared header") {
  for (SweepKind kind : {SweepKind::Classify, SweepKind::Densities, SweepKind::Transients}) {
    const SweepGrid grid = run_sweep(small_spec(), kind, 1);
    std::ostringstream os;
    write_grid_csv(os, grid);
    const CsvTable t = reparse(os.str());
    CHECK(t.header == grid_columns());
    REQUIRE(t.rows.size() == grid.cells.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      const auto& c = grid.cells[r];
      REQUIRE(row.size() == t.header.size());
      CHECK(std::stod(row[t.column("f0")]) == c.f0);
      CHECK(std::stod(row[t.column("f1Qp")]) == c.f1Qp);
      CHECK(parse_outcome(row[t.column("outcome")]) == c.outcome);
      CHECK(std::stod(row[t.column("x2")]) == c.densities.x[2]);
      CHECK(row[t.column("agreement")] == (c.agreement ? "1" : "0"));
      const std::string& time = row[t.column("time")];
      const std::string& lt = row[t.column("log10_time")];
      if (!time.empty() && std::stod(time) > 0.0)
        CHECK(std::stod(lt) == doctest::Approx(std::log10(std::stod(time))));
      else
        CHECK(lt.empty());
    }
  }
}

TEST_CASE("time column follows the sweep kind") {
  SweepSpec spec = small_spec();
  spec.f0 = {0.9, 0.9, 0.1};
  spec.f1 = {2.1, 2.1, 0.1};  // f0Q = f1Q': never resolves at classify_tol
  const SweepGrid classify = run_sweep(spec, SweepKind::Classify, 1);
  REQUIRE(classify.cells[0].outcome == Outcome::Unresolved);
  std::ostringstream a;
  write_grid_csv(a, classify);
  const CsvTable ta = reparse(a.str());
  CHECK(ta.rows[0][ta.column("time")].empty());
  CHECK(ta.rows[0][ta.column("log10_time")].empty());

  const SweepGrid transients = run_sweep(spec, SweepKind::Transients, 1);
  std::ostringstream b;
  write_grid_csv(b, transients);
  const CsvTable tb = reparse(b.str());
  REQUIRE(transients.cells[0].transient_time.has_value());
  CHECK(std::stod(tb.rows[0][tb.column("time")]) == *transients.cells[0].transient_time);
}

TEST_CASE("section CSV carries eigenvalues and the rescaled time") {
  SweepSpec spec;
  spec.f0 = {0.01 / spec.Q, 0.98 / spec.Q, 0.01 / spec.Q};
  spec.f1 = {0.05 / spec.Qp, 0.98 / spec.Qp, 0.05 / spec.Qp};
  spec.integrator.t_max = 2e3;
  const Section sec = section(spec, SweepKind::Transients, Axis::F0Q, 0.63, true, std::nullopt, 1);
  std::ostringstream os;
  write_section_csv(os, sec);
  const CsvTable t = reparse(os.str());
  CHECK(t.header == section_columns());
  REQUIRE(t.rows.size() == sec.points.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    REQUIRE(row.size() == t.header.size());
    const double lt = std::stod(row[t.column("log10_time")]);
    CHECK(std::stod(row[t.column("rescaled_time")]) == doctest::Approx((lt - 2.0) / 2.0));
    CHECK(std::stod(row[t.column("lambda1")]) == sec.points[r].eigen->values[0].real());
    CHECK(row[t.column("method")] == to_string(sec.points[r].eigen->method));
  }
}

TEST_CASE("section CSV without eigenvalues leaves the columns blank") {
  SweepSpec spec = small_spec();
  const Section sec = section(spec, SweepKind::Classify, Axis::F1Qp, 0.21, false, std::nullopt, 1);
  std::ostringstream os;
  write_section_csv(os, sec);
  const CsvTable t = reparse(os.str());
  for (const auto& row : t.rows) {
    REQUIRE(row.size() == t.header.size());
    CHECK(row[t.column("lambda1")].empty());
    CHECK(row[t.column("method")].empty());
  }
}

TEST_CASE("orbit CSV header and rows") {
  CHECK(orbit_columns(1) == std::vector<std::string>{"t", "x0", "x1", "x2"});
  CHECK(orbit_columns(3) ==
        std::vector<std::string>{"t", "x0", "x1", "x2_1", "x2_2", "x2_3"});
  std::ostringstream os;
  write_orbit_csv(os, {{0.0, 1.0, 0.0, 0.0}, {0.5, 0.25, 0.25, 0.5}}, 1);
  CHECK(os.str() == "t,x0,x1,x2\n0,1,0,0\n0.5,0.25,0.25,0.5\n");
}

TEST_CASE("reader keeps trailing empty fields and rejects unknown columns") {
  const CsvTable t = reparse("a,b,c\n1,,\n\n2,3,4\n");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0] == std::vector<std::string>{"1", "", ""});
  CHECK(t.column("c") == 2);
  CHECK_THROWS_AS(t.column("d"), Error);
  CHECK(reparse("").header.empty());
}
