#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agdb/agql.hpp"
#include "agdb/closure.hpp"
#include "agdb/table_store.hpp"

namespace agdb {

enum class QueryMode { kstar, kstar_array };

std::string_view to_string(QueryMode mode);
/// Accepts "kstar", "array" and "kstar-array".
QueryMode parse_query_mode(std::string_view name);

enum class SourceRole {
  word_arc,         // ANNOTATION rows of one type
  constrained_arc,  // ANNOTATION joined with the corpus feature table
  kstar_ref,        // KSTAR tuples of one tag
  kstar_array_ref,  // KSTAR_ARRAY matrices of one tag
  anchor_ref,       // ANCHOR rows; binds an anchor reached only by matrix cells
};

std::string_view to_string(SourceRole role);

enum class Col { annotation_id, start_anchor, end_anchor, ag_id, matrix, anchor_id };

/// SQL spelling: AnnotationId, StartAnchor, EndAnchor, AGId, A, AnchorId.
std::string_view column_name(Col column);

struct FeatureFilter {
  std::string column;
  std::string value;
  bool operator==(const FeatureFilter&) const = default;
};

struct Source {
  std::string alias;
  SourceRole role;
  std::size_t clause;
  std::string type;                  // annotation type, or closure tag for index sources
  std::optional<std::string> agset;  // AGSETID filter on annotation sources
  std::string corpus;                // feature table of a constrained arc
  std::vector<FeatureFilter> filters;
  std::vector<Col> columns;          // projected columns, in output order

  bool operator==(const Source&) const = default;
};

struct ColumnRef {
  std::size_t source;
  Col column;
  bool operator==(const ColumnRef&) const = default;
};

enum class PredicateKind { anchor_eq, id_eq, ag_eq, cell };

std::string_view to_string(PredicateKind kind);

/// Equalities compare lhs and rhs. A cell predicate tests
/// matrix(source `matrix`)[anchor_num(lhs)][anchor_num(rhs)].
struct Predicate {
  PredicateKind kind;
  ColumnRef lhs;
  ColumnRef rhs;
  std::size_t matrix = 0;

  bool operator==(const Predicate&) const = default;
};

struct Output {
  std::string variable;
  ColumnRef column;
  bool operator==(const Output&) const = default;
};

struct Plan {
  QueryMode mode = QueryMode::kstar;
  std::optional<std::string> domain;
  std::vector<Source> sources;
  std::vector<Predicate> predicates;
  std::vector<Output> projection;
  std::vector<std::size_t> join_order;  // indices into sources
  bool distinct = true;

  bool operator==(const Plan&) const = default;
};

struct CompileOptions {
  QueryMode mode = QueryMode::kstar;
  std::optional<std::string> domain;          // e.g. "wrd" selects the phn/wrd index
  std::optional<std::string> default_corpus;  // corpus meant by "db"
};

/// What compile may check a query against.
struct Catalog {
  std::map<std::string, std::vector<std::string>> feature_columns;  // corpus -> columns
  std::set<std::pair<IndexKind, std::string>> indexes;
};

Catalog catalog_of(const TableStore& store);

/// Without a catalog no existence checks are made, "db" resolves to the
/// default corpus (or stays "db"), and feature names are used verbatim.
/// With one: UnknownCorpus, UnknownFeature and MissingIndex are raised.
Plan compile(const agql::QueryAst& ast, const CompileOptions& options,
             const Catalog* catalog = nullptr);

/// ANSI SQL text of the plan.
std::string print_sql(const Plan& plan);

/// Line-oriented description used by --explain-plan.
std::string plan_to_text(const Plan& plan);

}  // namespace agdb
