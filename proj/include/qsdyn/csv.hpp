#ifndef QSDYN_CSV_HPP
#define QSDYN_CSV_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "qsdyn/sweep.hpp"

namespace qsdyn {

/// '.' decimal, no grouping, 17 significant digits (round-trips a double).
std::string format_double(double v);

const std::vector<std::string>& grid_columns();
const std::vector<std::string>& section_columns();
std::vector<std::string> orbit_columns(std::size_t subclones);

void write_grid_csv(std::ostream& os, const SweepGrid& grid);
void write_section_csv(std::ostream& os, const Section& section);
/// rows: (t, x0, x1, x2[, ...]).
void write_orbit_csv(std::ostream& os, const std::vector<std::vector<double>>& rows,
                     std::size_t subclones);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws if absent
};

/// Plain comma-separated reader (no quoting; none of our fields need it).
CsvTable read_csv(std::istream& is);

}  // namespace qsdyn

#endif  // QSDYN_CSV_HPP
