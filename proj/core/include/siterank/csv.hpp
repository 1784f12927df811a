/*
 * Copyright 2026 The siterank Authors.
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

#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace siterank::csv {

// Minimal RFC 4180 reader: comma separated, double-quoted fields with ""
// escapes, CRLF or LF line endings. Quoted fields may not span lines.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next non-blank record, or nullopt at end of input.
  std::optional<std::vector<std::string>> Next();

  // Physical line number of the record last returned by Next() (1-based).
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::vector<std::string> SplitLine(std::string_view line);

// Quotes `field` only when it contains a separator, quote or newline.
std::string Escape(std::string_view field);

void WriteRow(std::ostream& out, const std::vector<std::string>& fields);

// Shortest text that reads back to the same double.
std::string FormatDouble(double v);

}  // namespace siterank::csv
