#include "qsdyn/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

namespace qsdyn {

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& grid_columns() {
  static const std::vector<std::string> cols{
      "f0", "f1", "f0Q", "f1Qp", "outcome", "x0", "x1", "x2", "time", "log10_time",
      "analytic_outcome", "agreement", "error"};
  return cols;
}

const std::vector<std::string>& section_columns() {
  static const std::vector<std::string> cols{
      "f0", "f1", "f0Q", "f1Qp", "outcome", "x0", "x1", "x2", "time", "log10_time",
      "rescaled_time", "analytic_outcome", "agreement", "lambda1", "lambda2", "lambda3",
      "method", "error"};
  return cols;
}

std::vector<std::string> orbit_columns(std::size_t subclones) {
  std::vector<std::string> cols{"t", "x0", "x1"};
  if (subclones <= 1) {
    cols.push_back("x2");
  } else {
    for (std::size_t i = 1; i <= subclones; ++i) cols.push_back("x2_" + std::to_string(i));
  }
  return cols;
}

namespace {

void write_header(std::ostream& os, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

std::string error_field(const SweepCell& c) { return c.error ? to_string(*c.error) : ""; }

// Transient sweeps report the timing run; the others report arrival time of
// resolved cells.
std::optional<double> reported_time(const SweepCell& c, SweepKind kind) {
  if (kind == SweepKind::Transients) return c.transient_time;
  if (c.outcome != Outcome::Unresolved && !c.error) return c.arrival_time;
  return std::nullopt;
}

void write_cell_prefix(std::ostream& os, const SweepCell& c, SweepKind kind, bool with_rescaled) {
  os << format_double(c.f0) << ',' << format_double(c.f1) << ',' << format_double(c.f0Q) << ','
     << format_double(c.f1Qp) << ',' << to_string(c.outcome) << ','
     << format_double(c.densities.x[0]) << ',' << format_double(c.densities.x[1]) << ','
     << format_double(c.densities.x[2]) << ',';
  if (const auto t = reported_time(c, kind)) {
    // log10 of a zero time (orbit started on the fixed point) is left blank.
    const double lt = *t > 0.0 ? std::log10(*t) : std::nan("");
    os << format_double(*t) << ',' << format_double(lt) << ',';
    if (with_rescaled) os << format_double((lt - 2.0) / 2.0) << ',';
  } else {
    os << ",,";
    if (with_rescaled) os << ',';
  }
  os << to_string(c.analytic_outcome) << ',' << (c.agreement ? 1 : 0) << ',';
}

}  // namespace

void write_grid_csv(std::ostream& os, const SweepGrid& grid) {
  write_header(os, grid_columns());
  for (const auto& c : grid.cells) {
    write_cell_prefix(os, c, grid.kind, false);
    os << error_field(c) << '\n';
  }
}

void write_section_csv(std::ostream& os, const Section& section) {
  write_header(os, section_columns());
  for (const auto& pt : section.points) {
    write_cell_prefix(os, pt.cell, section.kind, true);
    if (pt.eigen) {
      for (const auto& l : pt.eigen->values) os << format_double(l.real()) << ',';
      os << to_string(pt.eigen->method) << ',';
    } else {
      os << ",,," << pt.eigen_error << ',';
    }
    os << error_field(pt.cell) << '\n';
  }
}

void write_orbit_csv(std::ostream& os, const std::vector<std::vector<double>>& rows,
                     std::size_t subclones) {
  write_header(os, orbit_columns(subclones));
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorCode::InvalidArgument, "CSV has no column '" + name + "'");
}

CsvTable read_csv(std::istream& is) {
  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
  };
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) return t;
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
  }
  return t;
}

}  // namespace qsdyn
