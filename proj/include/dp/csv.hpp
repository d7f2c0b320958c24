//
// Copyright 2026 The dpcore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DP_CSV_HPP_
#define DP_CSV_HPP_

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dp {
namespace csv {

// Minimal RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF line
// endings. Returns false at end of input.
inline bool ReadRow(std::istream& in, std::vector<std::string>* row) {
  row->clear();
  int c = in.get();
  if (c == EOF) return false;
  std::string field;
  bool quoted = false;
  while (true) {
    if (quoted) {
      if (c == EOF) throw std::runtime_error("csv: unterminated quoted field");
      if (c == '"') {
        int next = in.get();
        if (next == '"') {
          field.push_back('"');
        } else {
          quoted = false;
          c = next;
          continue;
        }
      } else {
        field.push_back(static_cast<char>(c));
      }
    } else {
      if (c == '"' && field.empty()) {
        quoted = true;
      } else if (c == ',') {
        row->push_back(std::move(field));
        field.clear();
      } else if (c == '\r') {
        // swallow; the following '\n' ends the row
      } else if (c == '\n' || c == EOF) {
        row->push_back(std::move(field));
        return true;
      } else {
        field.push_back(static_cast<char>(c));
      }
    }
    c = in.get();
  }
}

inline std::string EscapeField(const std::string& field) {
  bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out += "\"";
  return out;
}

inline std::string FormatRow(const std::vector<std::string>& row) {
  std::string out;
  for (size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += EscapeField(row[i]);
  }
  out.push_back('\n');
  return out;
}

}  // namespace csv
}  // namespace dp

#endif  // DP_CSV_HPP_
