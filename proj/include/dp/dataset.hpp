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

#ifndef DP_DATASET_HPP_
#define DP_DATASET_HPP_

#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dp/csv.hpp"
#include "dp/schema.hpp"

namespace dp {

struct IngestReport {
  size_t rows = 0;
  size_t clamped_values = 0;
};

// A multiset of records over a bounded schema. Duplicate rows are permitted;
// every stored value is within its declared bounds (enforced at construction).
// Immutable after construction, safe to share across tasks.
class Dataset {
 public:
  explicit Dataset(Schema schema, std::vector<Record> rows = {})
      : schema_(std::move(schema)), rows_(std::move(rows)) {
    for (const Record& r : rows_) CheckInBounds(r);
  }

  const Schema& schema() const { return schema_; }
  const std::vector<Record>& rows() const { return rows_; }
  size_t size() const { return rows_.size(); }

  double Numeric(size_t row, size_t col) const {
    return std::get<double>(rows_[row][col]);
  }
  const std::string& Category(size_t row, size_t col) const {
    return std::get<std::string>(rows_[row][col]);
  }

  // Ingests an RFC-4180 CSV whose header row matches the schema column names
  // in order. Out-of-bounds numeric values are clamped and counted.
  static Dataset FromCsv(const Schema& schema, std::istream& in, IngestReport* report) {
    std::vector<std::string> row;
    if (!csv::ReadRow(in, &row)) throw std::runtime_error("csv: missing header row");
    if (row.size() != schema.size()) {
      throw std::runtime_error("csv: header has " + std::to_string(row.size()) +
                               " columns, schema has " + std::to_string(schema.size()));
    }
    for (size_t i = 0; i < row.size(); ++i) {
      if (row[i] != schema.column(i).name) {
        throw std::runtime_error("csv: header column '" + row[i] +
                                 "' does not match schema column '" +
                                 schema.column(i).name + "'");
      }
    }
    std::vector<Record> rows;
    size_t clamped = 0;
    size_t lineno = 1;
    while (csv::ReadRow(in, &row)) {
      ++lineno;
      if (row.size() == 1 && row[0].empty()) continue;  // trailing newline
      try {
        ValidatedRecord vr = ValidateRecord(schema, row);
        clamped += static_cast<size_t>(vr.clamped);
        rows.push_back(std::move(vr.record));
      } catch (const std::exception& e) {
        throw std::runtime_error("csv row " + std::to_string(lineno) + ": " + e.what());
      }
    }
    if (report != nullptr) {
      report->rows = rows.size();
      report->clamped_values = clamped;
    }
    return Dataset(schema, std::move(rows));
  }

  static Dataset LoadCsvFile(const Schema& schema, const std::string& path,
                             IngestReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    return FromCsv(schema, in, report);
  }

 private:
  void CheckInBounds(const Record& r) const {
    if (r.size() != schema_.size()) throw std::invalid_argument("record arity mismatch");
    for (size_t i = 0; i < r.size(); ++i) {
      const ColumnSpec& col = schema_.column(i);
      if (col.numeric()) {
        double v = std::get<double>(r[i]);
        if (v < col.lower || v > col.upper) {
          throw std::invalid_argument("value out of bounds for column '" + col.name + "'");
        }
      } else {
        const std::string& c = std::get<std::string>(r[i]);
        if (std::find(col.categories.begin(), col.categories.end(), c) ==
            col.categories.end()) {
          throw std::invalid_argument("unknown category for column '" + col.name + "'");
        }
      }
    }
  }

  Schema schema_;
  std::vector<Record> rows_;
};

// The unit of change the privacy guarantee quantifies over: add/remove one
// record (sizes differ by 1) or exchange one record (equal sizes).
enum class AdjacencyMode { kAddRemove, kExchange };

inline const char* ToString(AdjacencyMode mode) {
  return mode == AdjacencyMode::kAddRemove ? "add_remove" : "exchange";
}

// Multiset symmetric difference |A △ B| between the row sets of two datasets.
inline size_t SymmetricDifferenceSize(const Dataset& a, const Dataset& b) {
  std::map<Record, int64_t> counts;
  for (const Record& r : a.rows()) ++counts[r];
  for (const Record& r : b.rows()) --counts[r];
  size_t diff = 0;
  for (const auto& [rec, c] : counts) diff += static_cast<size_t>(c < 0 ? -c : c);
  return diff;
}

namespace internal {

// Synthesizes a record at the boundary of the universe: each numeric field at
// the bound farther from the column's current mean (maximizing aggregate
// movement), each categorical field at its least frequent category. `variant`
// flips every choice, giving a second extreme when one is not enough.
inline Record ExtremeRecord(const Dataset& d, bool variant) {
  const Schema& schema = d.schema();
  Record rec;
  rec.reserve(schema.size());
  for (size_t c = 0; c < schema.size(); ++c) {
    const ColumnSpec& col = schema.column(c);
    if (col.numeric()) {
      double mean = (col.lower + col.upper) / 2.0;
      if (d.size() > 0) {
        double sum = 0;
        for (size_t r = 0; r < d.size(); ++r) sum += d.Numeric(r, c);
        mean = sum / static_cast<double>(d.size());
      }
      bool take_upper = (col.upper - mean) >= (mean - col.lower);
      if (variant) take_upper = !take_upper;
      rec.emplace_back(take_upper ? col.upper : col.lower);
    } else {
      std::vector<int64_t> freq(col.categories.size(), 0);
      for (size_t r = 0; r < d.size(); ++r) {
        auto it = std::find(col.categories.begin(), col.categories.end(), d.Category(r, c));
        ++freq[static_cast<size_t>(it - col.categories.begin())];
      }
      size_t pick = 0;
      for (size_t i = 1; i < freq.size(); ++i) {
        bool better = variant ? freq[i] > freq[pick] : freq[i] < freq[pick];
        if (better) pick = i;
      }
      rec.emplace_back(col.categories[pick]);
    }
  }
  return rec;
}

}  // namespace internal

// Generates up to `budget` adjacent pairs (D, D') for the verifier.
//   add_remove: (D, D minus row i) for each row, then (D, D plus an extreme
//               record). An empty dataset yields addition pairs only.
//   exchange:   (D, D with row i replaced by an extreme record); pairs where
//               no differing replacement exists are skipped.
inline std::vector<std::pair<Dataset, Dataset>> AdjacentPairs(const Dataset& d,
                                                              AdjacencyMode mode,
                                                              int budget) {
  if (budget < 1) throw std::invalid_argument("adjacent pairs: budget must be >= 1");
  std::vector<std::pair<Dataset, Dataset>> pairs;
  const Record extreme = internal::ExtremeRecord(d, /*variant=*/false);
  const Record extreme_alt = internal::ExtremeRecord(d, /*variant=*/true);

  if (mode == AdjacencyMode::kAddRemove) {
    for (size_t i = 0; i < d.size() && pairs.size() < static_cast<size_t>(budget); ++i) {
      std::vector<Record> rows = d.rows();
      rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(i));
      pairs.emplace_back(d, Dataset(d.schema(), std::move(rows)));
    }
    std::vector<Record> additions = {extreme};
    if (extreme_alt != extreme) additions.push_back(extreme_alt);
    for (const Record& add : additions) {
      if (pairs.size() >= static_cast<size_t>(budget)) break;
      std::vector<Record> rows = d.rows();
      rows.push_back(add);
      pairs.emplace_back(d, Dataset(d.schema(), std::move(rows)));
    }
  } else {
    for (size_t i = 0; i < d.size() && pairs.size() < static_cast<size_t>(budget); ++i) {
      const Record* replacement = nullptr;
      if (d.rows()[i] != extreme) replacement = &extreme;
      else if (d.rows()[i] != extreme_alt) replacement = &extreme_alt;
      if (replacement == nullptr) continue;  // degenerate one-point universe
      std::vector<Record> rows = d.rows();
      rows[i] = *replacement;
      pairs.emplace_back(d, Dataset(d.schema(), std::move(rows)));
    }
  }
  return pairs;
}

}  // namespace dp

#endif  // DP_DATASET_HPP_
