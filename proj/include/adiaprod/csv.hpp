#pragma once

// CSV tables of matrices over time: header row, then t, Re(M_ij), Im(M_ij)
// in row-major order, then optional extra columns; 17 significant digits.

#include "adiaprod/expansion.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace adiaprod::csv {

using Column = std::pair<std::string, std::vector<double>>;

std::string format_double(double v);

void write_table(std::ostream& os, const std::string& symbol, const PropagatorTable& u,
                 const std::vector<Column>& extra = {});
void write_table(const std::string& path, const std::string& symbol, const PropagatorTable& u,
                 const std::vector<Column>& extra = {});
void write_columns(const std::string& path, const std::vector<double>& t, const std::vector<Column>& columns);

struct MatrixTable {
  std::vector<double> t;
  std::vector<Matrix> values;
};

/// Reads any table written by write_table (extra columns ignored). Throws
/// ConfigError on malformed input.
MatrixTable read_table(const std::string& path);

/// Uniform grid matching the time column; throws GridMismatch otherwise.
Grid grid_of(const std::vector<double>& t);

}  // namespace adiaprod::csv
