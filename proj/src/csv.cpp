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

#include "sgl/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "sgl/error.hpp"
#include "sgl/lesion.hpp"

namespace sgl {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kNaming: return "naming";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kIntegrity: return "integrity";
    case ErrorKind::kUnsupportedDtype: return "unsupported_dtype";
    case ErrorKind::kMissingRoleMap: return "missing_role_map";
    case ErrorKind::kIncompatibleArchives: return "incompatible_archives";
    case ErrorKind::kMode: return "mode";
    case ErrorKind::kArity: return "arity";
    case ErrorKind::kTrajectory: return "trajectory";
    case ErrorKind::kOrdering: return "ordering";
    case ErrorKind::kEmptyContent: return "empty_content";
    case ErrorKind::kTransform: return "transform";
    case ErrorKind::kSize: return "size";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kConsistency: return "consistency";
    case ErrorKind::kComparison: return "comparison";
    case ErrorKind::kJoin: return "join";
    case ErrorKind::kPacking: return "packing";
  }
  return "unknown";
}

bool IsIntegrityError(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFormat:
    case ErrorKind::kIntegrity:
    case ErrorKind::kUnsupportedDtype:
    case ErrorKind::kIncompatibleArchives:
    case ErrorKind::kTrajectory:
    case ErrorKind::kOrdering:
    case ErrorKind::kEmptyContent:
    case ErrorKind::kTransform:
    case ErrorKind::kShape:
    case ErrorKind::kConsistency:
    case ErrorKind::kJoin:
    case ErrorKind::kPacking:
      return true;
    default:
      return false;
  }
}

std::string_view LesionCode(Lesion lesion) {
  switch (lesion) {
    case Lesion::kEX: return "EX";
    case Lesion::kCWS: return "CWS";
    case Lesion::kHE: return "HE";
    case Lesion::kMA: return "MA";
  }
  return "?";
}

std::optional<Lesion> ParseLesion(std::string_view code) {
  for (Lesion lesion : kAllLesions) {
    if (LesionCode(lesion) == code) return lesion;
  }
  return std::nullopt;
}

Lesion LesionFromCode(std::string_view code) {
  if (auto lesion = ParseLesion(code)) return *lesion;
  Fail(ErrorKind::kNaming, "unknown lesion code '" + std::string(code) + "'");
}

std::string FormatDouble(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) Fail(ErrorKind::kValidation, "cannot format number");
  return std::string(buffer, end);
}

double ParseDouble(std::string_view text) {
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    Fail(ErrorKind::kParse, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

long long ParseInteger(std::string_view text) {
  long long value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    Fail(ErrorKind::kParse, "not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::size_t CsvTable::Column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  Fail(ErrorKind::kParse, "missing CSV column '" + std::string(name) + "'");
}

namespace {

CsvRow ParseLine(std::string_view line, std::size_t line_number) {
  CsvRow fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) {
    Fail(ErrorKind::kParse,
         "unterminated quote on CSV line " + std::to_string(line_number));
  }
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

CsvTable ParseCsv(std::string_view text) {
  CsvTable table;
  bool have_header = false;
  std::size_t line_number = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view() : text.substr(eol + 1);
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    CsvRow row = ParseLine(line, line_number);
    if (!have_header) {
      table.header = std::move(row);
      have_header = true;
      continue;
    }
    if (row.size() != table.header.size()) {
      Fail(ErrorKind::kParse, "CSV line " + std::to_string(line_number) + " has " +
                                  std::to_string(row.size()) + " fields, expected " +
                                  std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CsvTable ReadCsvFile(const std::string& path) { return ParseCsv(ReadTextFile(path)); }

void WriteCsvRow(std::ostream& out, const CsvRow& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    const std::string& field = row[i];
    if (field.find_first_of(",\"\n\r") == std::string::npos) {
      out << field;
      continue;
    }
    out << '"';
    for (char c : field) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

std::string ToCsv(const CsvTable& table) {
  std::ostringstream out;
  WriteCsvRow(out, table.header);
  for (const auto& row : table.rows) WriteCsvRow(out, row);
  return out.str();
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteTextFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorKind::kIo, "cannot create '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) Fail(ErrorKind::kIo, "write failed for '" + path + "'");
}

std::vector<std::string> SplitList(std::string_view text, char separator) {
  std::vector<std::string> parts;
  while (true) {
    const std::size_t pos = text.find(separator);
    std::string_view part = text.substr(0, pos);
    if (!part.empty()) parts.emplace_back(part);
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return parts;
}

}  // namespace sgl
