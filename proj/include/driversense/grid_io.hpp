// Copyright 2026 The DriverSense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DRIVERSENSE_GRID_IO_HPP_
#define DRIVERSENSE_GRID_IO_HPP_

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "driversense/grid.hpp"

namespace driversense {

// Shortest decimal that round-trips to the same double.
inline std::string FormatDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) ThrowInvariant("double formatting failed");
  return std::string(buf, end);
}

inline double ParseDouble(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' ||
                          last[-1] == '\r')) {
    --last;
  }
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    ThrowData("not a number: '" + s + "'");
  }
  return v;
}

// One line per grid row, comma separated.
inline void WriteGridCsv(std::ostream& out, const OccupancyGrid& grid) {
  const GridSpec& spec = grid.spec();
  for (int r = 0; r < spec.height_cells; ++r) {
    for (int c = 0; c < spec.width_cells; ++c) {
      if (c) out << ',';
      out << FormatDouble(grid.at(c, r));
    }
    out << '\n';
  }
}

inline void WriteBinaryMapCsv(std::ostream& out, const BinaryMap& map) {
  const GridSpec& spec = map.spec();
  for (int r = 0; r < spec.height_cells; ++r) {
    for (int c = 0; c < spec.width_cells; ++c) {
      if (c) out << ',';
      out << static_cast<int>(map.at(spec.Index(c, r)));
    }
    out << '\n';
  }
}

namespace internal {

inline std::vector<double> ReadCsvCells(std::istream& in,
                                        const GridSpec& spec) {
  std::vector<double> values;
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string field;
    int cols = 0;
    while (std::getline(ss, field, ',')) {
      values.push_back(ParseDouble(field));
      ++cols;
    }
    if (cols != spec.width_cells) {
      ThrowData("grid CSV row " + std::to_string(rows + 1) + " has " +
                std::to_string(cols) + " columns, expected " +
                std::to_string(spec.width_cells));
    }
    ++rows;
  }
  if (rows != spec.height_cells) {
    ThrowData("grid CSV has " + std::to_string(rows) + " rows, expected " +
              std::to_string(spec.height_cells));
  }
  return values;
}

}  // namespace internal

inline OccupancyGrid ReadGridCsv(std::istream& in, const GridSpec& spec) {
  spec.Validate();
  return OccupancyGrid(spec, internal::ReadCsvCells(in, spec));
}

inline BinaryMap ReadBinaryMapCsv(std::istream& in, const GridSpec& spec) {
  spec.Validate();
  std::vector<std::uint8_t> cells;
  for (double v : internal::ReadCsvCells(in, spec)) {
    if (v != 0.0 && v != 1.0) ThrowData("binary map CSV entries must be 0/1");
    cells.push_back(static_cast<std::uint8_t>(v));
  }
  return BinaryMap(spec, std::move(cells));
}

// Binary 8-bit PGM with gray = round(p * 255); row 0 is the top image row.
inline void WriteGridPgm(std::ostream& out, const OccupancyGrid& grid) {
  const GridSpec& spec = grid.spec();
  out << "P5\n" << spec.width_cells << ' ' << spec.height_cells << "\n255\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.put(static_cast<char>(
        static_cast<unsigned char>(std::lround(grid.at(i) * 255.0))));
  }
}

}  // namespace driversense

#endif  // DRIVERSENSE_GRID_IO_HPP_
