#include "adiaprod/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace adiaprod::csv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_table(std::ostream& os, const std::string& symbol, const PropagatorTable& u,
                 const std::vector<Column>& extra) {
  const int dim = u.dim();
  os << 't';
  for (int i = 1; i <= dim; ++i)
    for (int j = 1; j <= dim; ++j) os << ",re_" << symbol << i << j << ",im_" << symbol << i << j;
  for (const auto& col : extra) os << ',' << col.first;
  os << '\n';
  for (int k = 0; k < u.grid.size(); ++k) {
    os << format_double(u.grid[k]);
    const Matrix& m = u[k];
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) os << ',' << format_double(m(i, j).real()) << ',' << format_double(m(i, j).imag());
    for (const auto& col : extra) os << ',' << format_double(col.second[k]);
    os << '\n';
  }
}

void write_table(const std::string& path, const std::string& symbol, const PropagatorTable& u,
                 const std::vector<Column>& extra) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_table(os, symbol, u, extra);
}

void write_columns(const std::string& path, const std::vector<double>& t, const std::vector<Column>& columns) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  os << 't';
  for (const auto& col : columns) os << ',' << col.first;
  os << '\n';
  for (std::size_t k = 0; k < t.size(); ++k) {
    os << format_double(t[k]);
    for (const auto& col : columns) os << ',' << format_double(col.second[k]);
    os << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

}  // namespace

MatrixTable read_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(path + ": empty file");
  const std::vector<std::string> header = split(line);
  if (header.empty() || header[0] != "t") throw ConfigError(path + ": first column must be t");
  int entries = 0;
  while (1 + 2 * entries + 1 < static_cast<int>(header.size()) && header[1 + 2 * entries].rfind("re_", 0) == 0 &&
         header[2 + 2 * entries].rfind("im_", 0) == 0)
    ++entries;
  const int dim = static_cast<int>(std::lround(std::sqrt(entries)));
  if (dim < 1 || dim * dim != entries) throw ConfigError(path + ": matrix columns do not form a square matrix");

  MatrixTable table;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() < static_cast<std::size_t>(1 + 2 * entries))
      throw ConfigError(path + ": row " + std::to_string(row) + " is too short");
    auto number = [&](std::size_t i) {
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str() || *end != '\0')
        throw ConfigError(path + ": row " + std::to_string(row) + ": bad number '" + cells[i] + "'");
      return v;
    };
    table.t.push_back(number(0));
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        const std::size_t c = 1 + 2 * (i * dim + j);
        m(i, j) = Complex(number(c), number(c + 1));
      }
    table.values.push_back(std::move(m));
  }
  if (table.t.size() < 3) throw ConfigError(path + ": need at least 3 rows");
  return table;
}

Grid grid_of(const std::vector<double>& t) {
  if (t.size() < 3 || t.front() != 0.0) throw NumericalError(Failure::GridMismatch, "time column must start at 0");
  const Grid g(t.back(), static_cast<int>(t.size()) - 1);
  for (std::size_t k = 0; k < t.size(); ++k)
    if (std::abs(t[k] - g[static_cast<int>(k)]) > 1e-9 * g.dt())
      throw NumericalError(Failure::GridMismatch, "time column is not uniform");
  return g;
}

}  // namespace adiaprod::csv
