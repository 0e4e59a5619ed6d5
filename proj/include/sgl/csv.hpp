/*
 * Copyright 2026 The seg-genlab Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SGL_CSV_HPP
#define SGL_CSV_HPP

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sgl {

// Shortest decimal text that round-trips to the same double.
std::string FormatDouble(double value);
double ParseDouble(std::string_view text);
long long ParseInteger(std::string_view text);

using CsvRow = std::vector<std::string>;

struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;

  // Column index by header name; throws a parse error when absent.
  std::size_t Column(std::string_view name) const;
};

// RFC 4180 subset: comma separated, optional double-quoted fields, LF or CRLF.
// Blank lines and lines starting with '#' are skipped.
CsvTable ParseCsv(std::string_view text);
CsvTable ReadCsvFile(const std::string& path);

void WriteCsvRow(std::ostream& out, const CsvRow& row);
std::string ToCsv(const CsvTable& table);

std::string ReadTextFile(const std::string& path);
// Writes atomically enough for our purposes: truncate, write, flush, check.
void WriteTextFile(const std::string& path, std::string_view contents);

std::vector<std::string> SplitList(std::string_view text, char separator);

}  // namespace sgl

#endif  // SGL_CSV_HPP
