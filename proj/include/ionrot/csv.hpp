// CSV emission: 17 significant digits, LF line endings, one header row of
// name|unit|source-module cells.
#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ionrot/errors.hpp"

namespace ionrot {

struct CsvColumn {
  std::string name;
  std::string unit;
  std::string source;
  std::vector<double> values;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const std::string& path,
                      const std::vector<CsvColumn>& columns) {
  std::ofstream out(path, std::ios::binary); // binary: keep LF on any host
  if (!out) throw Error("write_csv: cannot open " + path);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out << ',';
    out << columns[c].name << '|' << columns[c].unit << '|'
        << columns[c].source;
  }
  out << '\n';
  std::size_t rows = columns.empty() ? 0 : columns[0].values.size();
  for (const auto& col : columns)
    if (col.values.size() != rows)
      throw Error("write_csv: ragged columns in " + path);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out << ',';
      out << format_double(columns[c].values[r]);
    }
    out << '\n';
  }
}

} // namespace ionrot
