// pathdisc/io.hpp

// Copyright 2026  The pathdisc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pathdisc {

/// Whole-file read; a missing or unreadable file is a ValidationError.
std::string read_file(const std::string& path);

/// Writes to a sibling temporary file and renames it over `path`, creating
/// parent directories as needed.
void write_file_atomic(const std::string& path, std::string_view content);

/// Minimal CSV table: header row plus string cells. No quoting; cells must
/// not contain commas or newlines.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};

std::string to_csv(const CsvTable& table);
CsvTable parse_csv(std::string_view text);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Strict decimal parse of the whole string; `what` names it in the error.
double parse_double(std::string_view text, std::string_view what);

}  // namespace pathdisc
