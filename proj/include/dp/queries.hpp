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

#ifndef DP_QUERIES_HPP_
#define DP_QUERIES_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dp/accountant.hpp"
#include "dp/dataset.hpp"
#include "dp/mechanisms.hpp"
#include "dp/privacy.hpp"
#include "dp/schema.hpp"

namespace dp {

enum class QueryKind { kCount, kSum, kMean, kHistogram };

inline const char* ToString(QueryKind kind) {
  switch (kind) {
    case QueryKind::kCount: return "count";
    case QueryKind::kSum: return "sum";
    case QueryKind::kMean: return "mean";
    case QueryKind::kHistogram: return "histogram";
  }
  return "?";
}

enum class CmpOp { kEq, kNe, kLt, kLe, kGt, kGe };

struct PredicateAtom {
  std::string column;
  CmpOp op = CmpOp::kEq;
  std::string literal;  // typed against the schema at validation time
};

// Conjunction of simple comparisons.
struct Predicate {
  std::vector<PredicateAtom> atoms;
  bool empty() const { return atoms.empty(); }
};

// One axis of a histogram: a numeric column with partition edges, or a
// categorical column (empty edges; one bin per declared category).
struct HistogramDimension {
  std::string column;
  std::vector<double> edges;
};

// A declared aggregate carrying everything needed to derive its own
// sensitivity: count/sum/mean over an optional predicate, or a histogram over
// the cross product of bin dimensions.
struct Query {
  QueryKind kind = QueryKind::kCount;
  std::string column;                    // sum / mean
  Predicate predicate;
  std::vector<HistogramDimension> dims;  // histogram
};

namespace internal {

inline CmpOp ParseCmpOp(const std::string& tok) {
  if (tok == "==") return CmpOp::kEq;
  if (tok == "!=") return CmpOp::kNe;
  if (tok == "<") return CmpOp::kLt;
  if (tok == "<=") return CmpOp::kLe;
  if (tok == ">") return CmpOp::kGt;
  if (tok == ">=") return CmpOp::kGe;
  throw std::invalid_argument("unknown comparison operator '" + tok + "'");
}

inline Predicate ParsePredicate(const std::vector<std::string>& tokens, size_t start,
                                const std::string& ctx) {
  Predicate pred;
  size_t i = start;
  while (i < tokens.size()) {
    if (i + 2 >= tokens.size()) {
      throw std::invalid_argument(ctx + ": predicate needs 'column op literal'");
    }
    PredicateAtom atom;
    atom.column = tokens[i];
    atom.op = ParseCmpOp(tokens[i + 1]);
    atom.literal = tokens[i + 2];
    pred.atoms.push_back(std::move(atom));
    i += 3;
    if (i == tokens.size()) break;
    if (tokens[i] != "AND") {
      throw std::invalid_argument(ctx + ": expected AND between comparisons");
    }
    ++i;
  }
  return pred;
}

}  // namespace internal

// Line-oriented query text:
//   kind count|sum|mean|histogram
//   column <name>                                  (sum/mean)
//   dim <name> [edges e0,e1,...,ek]                (histogram; repeatable)
//   where <col> <op> <lit> [AND <col> <op> <lit>]*
inline Query ParseQueryText(const std::string& text) {
  Query query;
  bool have_kind = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::vector<std::string> tok = internal::SplitWhitespace(line);
    if (tok.empty()) continue;
    std::string ctx = "query line " + std::to_string(lineno);
    if (tok[0] == "kind") {
      if (tok.size() != 2) throw std::invalid_argument(ctx + ": expected 'kind <name>'");
      if (tok[1] == "count") query.kind = QueryKind::kCount;
      else if (tok[1] == "sum") query.kind = QueryKind::kSum;
      else if (tok[1] == "mean") query.kind = QueryKind::kMean;
      else if (tok[1] == "histogram") query.kind = QueryKind::kHistogram;
      else throw std::invalid_argument(ctx + ": unknown query kind '" + tok[1] + "'");
      have_kind = true;
    } else if (tok[0] == "column") {
      if (tok.size() != 2) throw std::invalid_argument(ctx + ": expected 'column <name>'");
      query.column = tok[1];
    } else if (tok[0] == "dim") {
      HistogramDimension dim;
      if (tok.size() == 2) {
        dim.column = tok[1];
      } else if (tok.size() == 4 && tok[2] == "edges") {
        dim.column = tok[1];
        for (const std::string& part : internal::SplitComma(tok[3])) {
          dim.edges.push_back(internal::ParseDouble(part, ctx));
        }
      } else {
        throw std::invalid_argument(ctx + ": expected 'dim <name> [edges e0,e1,...]'");
      }
      query.dims.push_back(std::move(dim));
    } else if (tok[0] == "where") {
      query.predicate = internal::ParsePredicate(tok, 1, ctx);
    } else {
      throw std::invalid_argument(ctx + ": unknown directive '" + tok[0] + "'");
    }
  }
  if (!have_kind) throw std::invalid_argument("query: missing 'kind' line");
  return query;
}

inline Query LoadQueryFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open query file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseQueryText(buf.str());
}

namespace internal {

inline void ValidateAtom(const PredicateAtom& atom, const Schema& schema) {
  const ColumnSpec& col = schema.column(schema.RequireIndex(atom.column));
  if (col.numeric()) {
    ParseDouble(atom.literal, "predicate on '" + atom.column + "'");
  } else {
    if (atom.op != CmpOp::kEq && atom.op != CmpOp::kNe) {
      throw std::invalid_argument("predicate: ordering comparison on categorical column '" +
                                  atom.column + "'");
    }
    if (std::find(col.categories.begin(), col.categories.end(), atom.literal) ==
        col.categories.end()) {
      throw std::invalid_argument("predicate: unknown category '" + atom.literal +
                                  "' for column '" + atom.column + "'");
    }
  }
}

}  // namespace internal

inline size_t HistogramCellCount(const Query& query, const Schema& schema) {
  size_t cells = 1;
  for (const HistogramDimension& dim : query.dims) {
    const ColumnSpec& col = schema.column(schema.RequireIndex(dim.column));
    if (col.numeric() && dim.edges.size() < 2) {
      throw std::invalid_argument("histogram dim '" + dim.column +
                                  "' needs at least two edges");
    }
    cells *= col.numeric() ? dim.edges.size() - 1 : col.categories.size();
  }
  return cells;
}

// Throws unless the query is well formed against the schema: sum/mean need a
// numeric column, histogram bins must partition the declared domain of every
// dimension (edges exactly spanning [lower, upper], strictly increasing).
inline void ValidateQuery(const Query& query, const Schema& schema) {
  for (const PredicateAtom& atom : query.predicate.atoms) {
    internal::ValidateAtom(atom, schema);
  }
  switch (query.kind) {
    case QueryKind::kCount:
      if (!query.column.empty()) throw std::invalid_argument("count query takes no column");
      if (!query.dims.empty()) throw std::invalid_argument("count query takes no dims");
      break;
    case QueryKind::kSum:
    case QueryKind::kMean: {
      if (query.column.empty()) {
        throw std::invalid_argument(std::string(ToString(query.kind)) +
                                    " query requires a column");
      }
      if (!query.dims.empty()) throw std::invalid_argument("aggregate query takes no dims");
      const ColumnSpec& col = schema.column(schema.RequireIndex(query.column));
      if (!col.numeric()) {
        throw std::invalid_argument(std::string(ToString(query.kind)) +
                                    " requires a numeric (bounded) column");
      }
      break;
    }
    case QueryKind::kHistogram: {
      if (!query.column.empty()) {
        throw std::invalid_argument("histogram uses 'dim' lines, not 'column'");
      }
      if (query.dims.empty()) {
        throw std::invalid_argument("histogram requires at least one dim");
      }
      for (const HistogramDimension& dim : query.dims) {
        const ColumnSpec& col = schema.column(schema.RequireIndex(dim.column));
        if (col.numeric()) {
          if (dim.edges.size() < 2) {
            throw std::invalid_argument("histogram dim '" + dim.column +
                                        "' needs at least two edges");
          }
          for (size_t i = 1; i < dim.edges.size(); ++i) {
            if (!(dim.edges[i - 1] < dim.edges[i])) {
              throw std::invalid_argument("histogram dim '" + dim.column +
                                          "': edges must be strictly increasing");
            }
          }
          if (dim.edges.front() != col.lower || dim.edges.back() != col.upper) {
            throw std::invalid_argument("histogram dim '" + dim.column +
                                        "': edges must span the declared bounds exactly");
          }
        } else if (!dim.edges.empty()) {
          throw std::invalid_argument("histogram dim '" + dim.column +
                                      "' is categorical and takes no edges");
        }
      }
      break;
    }
  }
}

inline bool EvalPredicate(const Predicate& pred, const Schema& schema, const Record& record) {
  for (const PredicateAtom& atom : pred.atoms) {
    size_t idx = schema.RequireIndex(atom.column);
    const ColumnSpec& col = schema.column(idx);
    bool ok;
    if (col.numeric()) {
      double v = std::get<double>(record[idx]);
      double lit = internal::ParseDouble(atom.literal, "predicate literal");
      switch (atom.op) {
        case CmpOp::kEq: ok = v == lit; break;
        case CmpOp::kNe: ok = v != lit; break;
        case CmpOp::kLt: ok = v < lit; break;
        case CmpOp::kLe: ok = v <= lit; break;
        case CmpOp::kGt: ok = v > lit; break;
        case CmpOp::kGe: ok = v >= lit; break;
        default: ok = false;
      }
    } else {
      const std::string& v = std::get<std::string>(record[idx]);
      ok = atom.op == CmpOp::kEq ? v == atom.literal : v != atom.literal;
    }
    if (!ok) return false;
  }
  return true;
}

namespace internal {

// Interval with open/closed ends, for satisfiability analysis.
struct DomainInterval {
  double lo, hi;
  bool lo_open = false, hi_open = false;
  bool integer = false;

  bool Empty() const {
    if (integer) {
      double effective_lo = lo_open ? std::floor(lo) + 1 : std::ceil(lo);
      double effective_hi = hi_open ? std::ceil(hi) - 1 : std::floor(hi);
      return effective_lo > effective_hi;
    }
    if (lo > hi) return true;
    return lo == hi && (lo_open || hi_open);
  }
};

}  // namespace internal

// Whether any in-bounds record can satisfy the predicate, by per-column
// interval (numeric) or category-set (categorical) intersection against the
// declared domain. Exact for the AND-only grammar except for != atoms on
// integer columns, where a range riddled with exclusions is conservatively
// reported satisfiable. An unsatisfiable predicate makes count/sum/histogram
// queries constant, hence sensitivity 0; the conservative direction only ever
// overstates sensitivity.
inline bool PredicateSatisfiable(const Predicate& pred, const Schema& schema) {
  std::map<size_t, internal::DomainInterval> intervals;
  std::map<size_t, std::vector<std::string>> category_sets;
  for (const PredicateAtom& atom : pred.atoms) {
    size_t idx = schema.RequireIndex(atom.column);
    const ColumnSpec& col = schema.column(idx);
    if (col.numeric()) {
      auto [it, inserted] = intervals.try_emplace(
          idx, internal::DomainInterval{col.lower, col.upper, false, false,
                                        col.kind == ColumnKind::kInteger});
      internal::DomainInterval& iv = it->second;
      double lit = internal::ParseDouble(atom.literal, "predicate literal");
      switch (atom.op) {
        case CmpOp::kEq: {
          bool inside = (lit > iv.lo || (lit == iv.lo && !iv.lo_open)) &&
                        (lit < iv.hi || (lit == iv.hi && !iv.hi_open));
          if (inside) {
            iv.lo = iv.hi = lit;
            iv.lo_open = iv.hi_open = false;
          } else {
            iv.lo = 1.0;  // force empty
            iv.hi = 0.0;
            iv.lo_open = iv.hi_open = false;
          }
          break;
        }
        case CmpOp::kNe:
          // Only excludes a point; handled after intersection for the
          // degenerate single-point case.
          break;
        case CmpOp::kLt:
          if (lit < iv.hi || (lit == iv.hi && !iv.hi_open)) { iv.hi = lit; iv.hi_open = true; }
          break;
        case CmpOp::kLe:
          if (lit < iv.hi) { iv.hi = lit; iv.hi_open = false; }
          break;
        case CmpOp::kGt:
          if (lit > iv.lo || (lit == iv.lo && !iv.lo_open)) { iv.lo = lit; iv.lo_open = true; }
          break;
        case CmpOp::kGe:
          if (lit > iv.lo) { iv.lo = lit; iv.lo_open = false; }
          break;
      }
    } else {
      auto [it, inserted] = category_sets.try_emplace(idx, col.categories);
      std::vector<std::string>& cats = it->second;
      if (atom.op == CmpOp::kEq) {
        bool present = std::find(cats.begin(), cats.end(), atom.literal) != cats.end();
        cats.clear();
        if (present) cats.push_back(atom.literal);
      } else {
        cats.erase(std::remove(cats.begin(), cats.end(), atom.literal), cats.end());
      }
    }
  }
  for (const auto& [idx, iv] : intervals) {
    if (iv.Empty()) return false;
    // A != atom empties the column only when the interval is that single point.
    if (!iv.lo_open && !iv.hi_open && iv.lo == iv.hi) {
      for (const PredicateAtom& atom : pred.atoms) {
        if (atom.op == CmpOp::kNe && schema.RequireIndex(atom.column) == idx &&
            internal::ParseDouble(atom.literal, "predicate literal") == iv.lo) {
          return false;
        }
      }
    }
  }
  for (const auto& [idx, cats] : category_sets) {
    if (cats.empty()) return false;
  }
  return true;
}

namespace internal {

inline size_t DimensionBinIndex(const HistogramDimension& dim, const ColumnSpec& col,
                                const Value& value) {
  if (col.numeric()) {
    double v = std::get<double>(value);
    // Half-open bins [e_i, e_{i+1}); the last bin is closed at the upper bound.
    size_t n = dim.edges.size() - 1;
    for (size_t i = 0; i + 1 < n; ++i) {
      if (v < dim.edges[i + 1]) return i;
    }
    return n - 1;
  }
  auto it = std::find(col.categories.begin(), col.categories.end(),
                      std::get<std::string>(value));
  return static_cast<size_t>(it - col.categories.begin());
}

}  // namespace internal

inline std::vector<std::string> HistogramCellLabels(const Query& query, const Schema& schema) {
  std::vector<std::vector<std::string>> per_dim;
  for (const HistogramDimension& dim : query.dims) {
    const ColumnSpec& col = schema.column(schema.RequireIndex(dim.column));
    std::vector<std::string> labels;
    if (col.numeric()) {
      for (size_t i = 0; i + 1 < dim.edges.size(); ++i) {
        std::ostringstream os;
        os << dim.column << "=[" << dim.edges[i] << "," << dim.edges[i + 1]
           << (i + 2 == dim.edges.size() ? "]" : ")");
        labels.push_back(os.str());
      }
    } else {
      for (const std::string& cat : col.categories) labels.push_back(dim.column + "=" + cat);
    }
    per_dim.push_back(std::move(labels));
  }
  std::vector<std::string> cells = {""};
  for (const auto& labels : per_dim) {
    std::vector<std::string> next;
    next.reserve(cells.size() * labels.size());
    for (const std::string& prefix : cells) {
      for (const std::string& label : labels) {
        next.push_back(prefix.empty() ? label : prefix + " & " + label);
      }
    }
    cells = std::move(next);
  }
  return cells;
}

// Exact (non-private) answer. count and sum/mean are one-dimensional;
// histogram has one coordinate per cell in row-major dimension order.
inline std::vector<double> Evaluate(const Query& query, const Dataset& dataset) {
  const Schema& schema = dataset.schema();
  ValidateQuery(query, schema);
  switch (query.kind) {
    case QueryKind::kCount: {
      double n = 0;
      for (const Record& r : dataset.rows()) {
        if (EvalPredicate(query.predicate, schema, r)) n += 1;
      }
      return {n};
    }
    case QueryKind::kSum:
    case QueryKind::kMean: {
      size_t idx = schema.RequireIndex(query.column);
      double sum = 0;
      double n = 0;
      for (const Record& r : dataset.rows()) {
        if (!EvalPredicate(query.predicate, schema, r)) continue;
        sum += std::get<double>(r[idx]);
        n += 1;
      }
      if (query.kind == QueryKind::kSum) return {sum};
      if (n == 0) throw std::runtime_error("mean over empty selection");
      return {sum / n};
    }
    case QueryKind::kHistogram: {
      std::vector<size_t> dim_index;
      std::vector<size_t> dim_size;
      for (const HistogramDimension& dim : query.dims) {
        size_t idx = schema.RequireIndex(dim.column);
        dim_index.push_back(idx);
        const ColumnSpec& col = schema.column(idx);
        dim_size.push_back(col.numeric() ? dim.edges.size() - 1 : col.categories.size());
      }
      std::vector<double> counts(HistogramCellCount(query, schema), 0.0);
      for (const Record& r : dataset.rows()) {
        if (!EvalPredicate(query.predicate, schema, r)) continue;
        size_t cell = 0;
        for (size_t d = 0; d < query.dims.size(); ++d) {
          const ColumnSpec& col = schema.column(dim_index[d]);
          cell = cell * dim_size[d] +
                 internal::DimensionBinIndex(query.dims[d], col, r[dim_index[d]]);
        }
        counts[cell] += 1;
      }
      return counts;
    }
  }
  throw std::logic_error("unreachable");
}

// Global sensitivity under add/remove adjacency:
//   count      -> 1          histogram -> 1 (one record moves one cell by 1)
//   sum        -> max(|lower|, |upper|) of the column
//   mean       -> (upper - lower) / public_n   (|D| treated as public, fixed)
// A predicate that no in-bounds record can satisfy makes the answer constant,
// so the sensitivity collapses to 0.
inline Sensitivity DeriveSensitivity(const Query& query, const Schema& schema,
                                     std::optional<int64_t> public_n = std::nullopt) {
  ValidateQuery(query, schema);
  bool satisfiable = PredicateSatisfiable(query.predicate, schema);
  switch (query.kind) {
    case QueryKind::kCount:
      return satisfiable ? Sensitivity(1.0, 1.0, 1) : Sensitivity(0.0, 0.0, 1);
    case QueryKind::kHistogram: {
      int cells = static_cast<int>(HistogramCellCount(query, schema));
      return satisfiable ? Sensitivity(1.0, 1.0, cells) : Sensitivity(0.0, 0.0, cells);
    }
    case QueryKind::kSum: {
      const ColumnSpec& col = schema.column(schema.RequireIndex(query.column));
      double m = std::max(std::fabs(col.lower), std::fabs(col.upper));
      if (!satisfiable) m = 0.0;
      return Sensitivity(m, m, 1);
    }
    case QueryKind::kMean: {
      if (!public_n.has_value() || *public_n < 1) {
        throw std::invalid_argument("mean sensitivity requires public_n >= 1");
      }
      const ColumnSpec& col = schema.column(schema.RequireIndex(query.column));
      double m = (col.upper - col.lower) / static_cast<double>(*public_n);
      return Sensitivity(m, m, 1);
    }
  }
  throw std::logic_error("unreachable");
}

// Clamp-and-round post-processing for noisy histogram counts: elementwise
// max(0, round-half-to-even(x)). Takes only the noisy vector, never the data.
inline std::vector<int64_t> PostprocessHistogram(std::span<const double> noisy) {
  std::vector<int64_t> out;
  out.reserve(noisy.size());
  for (double v : noisy) {
    double rounded = std::nearbyint(v);  // default FE rounding: half to even
    out.push_back(rounded <= 0.0 ? 0 : static_cast<int64_t>(rounded));
  }
  return out;
}

enum class MechanismChoice { kLaplace, kGaussianClassic, kGaussianAnalytic };

inline const char* ToString(MechanismChoice m) {
  switch (m) {
    case MechanismChoice::kLaplace: return "laplace";
    case MechanismChoice::kGaussianClassic: return "gaussian_classic";
    case MechanismChoice::kGaussianAnalytic: return "gaussian_analytic";
  }
  return "?";
}

// Private release pipeline: derive sensitivity, evaluate exactly, charge the
// ledger, then add noise. Histogram cells are disjoint -- one record affects
// one cell -- so a histogram is charged once (parallel composition), not once
// per cell; the ledger entry says so. The dataset is not consulted after the
// noise is added.
inline MechanismRelease Release(const Query& query, const Dataset& dataset,
                                const PrivacyParams& params, MechanismChoice mechanism,
                                Ledger& ledger, RngStream& rng,
                                double beta = kDefaultBeta,
                                std::optional<int64_t> public_n = std::nullopt) {
  const Schema& schema = dataset.schema();
  ValidateQuery(query, schema);
  if (!(params.epsilon > 0.0)) {
    throw std::invalid_argument("release: epsilon must be > 0");
  }
  if (query.kind == QueryKind::kMean && !public_n.has_value()) {
    public_n = static_cast<int64_t>(dataset.size());  // |D| is public metadata
  }
  Sensitivity sens = DeriveSensitivity(query, schema, public_n);
  std::vector<double> exact = Evaluate(query, dataset);

  // Validate mechanism parameters (and surface calibration errors) before the
  // ledger is charged.
  if (mechanism == MechanismChoice::kLaplace) {
    if (params.delta != 0.0) {
      throw std::invalid_argument("release: laplace is a pure-DP mechanism; delta must be 0");
    }
  } else {
    if (params.delta <= 0.0) {
      throw std::invalid_argument("release: gaussian mechanism requires delta > 0");
    }
    if (sens.l2() > 0.0) {
      if (mechanism == MechanismChoice::kGaussianClassic) {
        GaussianSigmaClassic(sens.l2(), params.epsilon, params.delta);
      } else {
        GaussianSigmaAnalytic(sens.l2(), params.epsilon, params.delta);
      }
    }
  }

  std::string tag = ToString(mechanism);
  tag += " ";
  tag += ToString(query.kind);
  if (query.kind == QueryKind::kHistogram) {
    tag += " (parallel composition: disjoint cells charged once)";
  }
  ledger.Register(params, tag);

  MechanismRelease release =
      mechanism == MechanismChoice::kLaplace
          ? ApplyLaplaceMechanism(exact, sens.l1(), params.epsilon, rng, beta)
          : ApplyGaussianMechanism(exact, sens.l2(), params.epsilon, params.delta, rng,
                                   mechanism == MechanismChoice::kGaussianClassic
                                       ? GaussianCalibration::kClassic
                                       : GaussianCalibration::kAnalytic,
                                   beta);
  return release;
}

}  // namespace dp

#endif  // DP_QUERIES_HPP_
