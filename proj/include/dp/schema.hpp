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

#ifndef DP_SCHEMA_HPP_
#define DP_SCHEMA_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

namespace dp {

enum class ColumnKind { kInteger, kReal, kCategorical };

inline const char* ToString(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kInteger: return "integer";
    case ColumnKind::kReal: return "real";
    case ColumnKind::kCategorical: return "categorical";
  }
  return "?";
}

// One column of a bounded, typed tabular schema. Numeric columns carry
// mandatory [lower, upper] bounds; without them no sensitivity is computable.
struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kReal;
  double lower = 0.0;  // numeric kinds only
  double upper = 0.0;  // numeric kinds only
  std::vector<std::string> categories;  // categorical only

  bool numeric() const { return kind != ColumnKind::kCategorical; }
};

namespace internal {

inline double ParseDouble(const std::string& token, const std::string& context) {
  try {
    size_t pos = 0;
    double v = std::stod(token, &pos);
    if (pos != token.size() || !std::isfinite(v)) {
      throw std::invalid_argument("trailing characters");
    }
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(context + ": unparsable numeric value '" + token + "'");
  }
}

inline std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) tokens.push_back(tok);
  return tokens;
}

inline std::vector<std::string> SplitComma(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace internal

// Ordered list of columns; the record universe is their cross product.
// Immutable after construction.
class Schema {
 public:
  explicit Schema(std::vector<ColumnSpec> columns) : columns_(std::move(columns)) {
    std::unordered_set<std::string> names;
    for (const ColumnSpec& col : columns_) {
      if (col.name.empty()) throw std::invalid_argument("schema: empty column name");
      if (!names.insert(col.name).second) {
        throw std::invalid_argument("schema: duplicate column name '" + col.name + "'");
      }
      if (col.numeric()) {
        if (!(col.lower < col.upper)) {
          throw std::invalid_argument("schema: column '" + col.name +
                                      "' requires lower < upper");
        }
      } else {
        if (col.categories.empty()) {
          throw std::invalid_argument("schema: categorical column '" + col.name +
                                      "' needs at least one category");
        }
        std::unordered_set<std::string> cats(col.categories.begin(), col.categories.end());
        if (cats.size() != col.categories.size()) {
          throw std::invalid_argument("schema: duplicate category in column '" + col.name + "'");
        }
        if (cats.count("") > 0) {
          throw std::invalid_argument("schema: empty category name in column '" + col.name + "'");
        }
      }
    }
  }

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  const ColumnSpec& column(size_t i) const { return columns_.at(i); }
  size_t size() const { return columns_.size(); }

  std::optional<size_t> IndexOf(std::string_view name) const {
    for (size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i].name == name) return i;
    }
    return std::nullopt;
  }

  size_t RequireIndex(std::string_view name) const {
    auto idx = IndexOf(name);
    if (!idx) throw std::invalid_argument("schema: no column named '" + std::string(name) + "'");
    return *idx;
  }

  // Line-oriented declarative text, one column per line:
  //   name integer|real lower upper
  //   name categorical c1,c2,...
  // '#' starts a comment; blank lines are skipped.
  static Schema Parse(const std::string& text) {
    std::vector<ColumnSpec> cols;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      std::vector<std::string> tok = internal::SplitWhitespace(line);
      if (tok.empty()) continue;
      std::string ctx = "schema line " + std::to_string(lineno);
      if (tok.size() < 2) throw std::invalid_argument(ctx + ": expected 'name kind ...'");
      ColumnSpec col;
      col.name = tok[0];
      if (tok[1] == "integer" || tok[1] == "real") {
        col.kind = tok[1] == "integer" ? ColumnKind::kInteger : ColumnKind::kReal;
        if (tok.size() != 4) throw std::invalid_argument(ctx + ": expected 'name kind lower upper'");
        col.lower = internal::ParseDouble(tok[2], ctx);
        col.upper = internal::ParseDouble(tok[3], ctx);
      } else if (tok[1] == "categorical") {
        col.kind = ColumnKind::kCategorical;
        if (tok.size() != 3) throw std::invalid_argument(ctx + ": expected 'name categorical c1,c2,...'");
        col.categories = internal::SplitComma(tok[2]);
      } else {
        throw std::invalid_argument(ctx + ": unknown column kind '" + tok[1] + "'");
      }
      cols.push_back(std::move(col));
    }
    return Schema(std::move(cols));
  }

  static Schema LoadFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open schema file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return Parse(buf.str());
  }

 private:
  std::vector<ColumnSpec> columns_;
};

// A cell value: double for numeric columns, category string otherwise.
using Value = std::variant<double, std::string>;
using Record = std::vector<Value>;

struct ValidatedRecord {
  Record record;
  int clamped = 0;  // number of numeric values clamped into bounds
};

// Parses and validates one raw record against the schema. Numeric values are
// clamped into [lower, upper] (and rounded for integer columns); values in
// undeclared categories are rejected.
inline ValidatedRecord ValidateRecord(const Schema& schema,
                                      const std::vector<std::string>& raw) {
  if (raw.size() != schema.size()) {
    throw std::invalid_argument("record has " + std::to_string(raw.size()) +
                                " values, schema has " + std::to_string(schema.size()) +
                                " columns");
  }
  ValidatedRecord out;
  out.record.reserve(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    const ColumnSpec& col = schema.column(i);
    if (col.numeric()) {
      double v = internal::ParseDouble(raw[i], "column '" + col.name + "'");
      if (col.kind == ColumnKind::kInteger) v = std::nearbyint(v);
      double clamped = std::clamp(v, col.lower, col.upper);
      if (clamped != v) ++out.clamped;
      out.record.emplace_back(clamped);
    } else {
      if (std::find(col.categories.begin(), col.categories.end(), raw[i]) ==
          col.categories.end()) {
        throw std::invalid_argument("unknown category '" + raw[i] + "' for column '" +
                                    col.name + "'");
      }
      out.record.emplace_back(raw[i]);
    }
  }
  return out;
}

}  // namespace dp

#endif  // DP_SCHEMA_HPP_
