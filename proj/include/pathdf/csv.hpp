/*
 * Copyright 2026 The pathdf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <Eigen/Core>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathdf {

/// Reads a plain numeric CSV matrix (comma separated, no quoting). Rows must
/// all have the same number of fields; a single header row can be skipped.
inline Eigen::MatrixXd load_matrix_csv(const std::string& path,
                                       bool skip_header = false) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && skip_header) continue;
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(field, &used));
        while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used]))) ++used;
        if (used != field.size())
          throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                 ": not a number: '" + field + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": ragged row (expected " +
                               std::to_string(rows.front().size()) + " fields, got " +
                               std::to_string(row.size()) + ")");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

/// Shortest decimal representation that round-trips, so rewriting a table
/// from the same numbers is byte-identical.
inline std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

}  // namespace pathdf
