#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agdb/model.hpp"
#include "agdb/tsv.hpp"

// Relational layout of an AGSet: the seven fixed tables, the per-corpus
// feature table, and the conversions between an AGSet and its rows.
namespace agdb::schema {

struct ColumnDef {
  std::string_view name;
  std::string_view sql_type;
  std::size_t max_length;  // 0 = unbounded (TEXT, FLOAT)
  bool not_null;
};

struct TableDef {
  std::string_view name;
  std::span<const ColumnDef> columns;
  std::string_view ddl;  // CREATE TABLE statement without the trailing ';'

  std::vector<std::string> column_names() const;
  std::size_t column_index(std::string_view column) const;
};

/// AGSET, AG, TIMELINE, SIGNAL, ANNOTATION, ANCHOR, METADATA in that order.
std::span<const TableDef> fixed_tables();
const TableDef& fixed_table(std::string_view name);
bool is_fixed_table(std::string_view name);

inline constexpr std::string_view kAgset = "AGSET";
inline constexpr std::string_view kAg = "AG";
inline constexpr std::string_view kTimeline = "TIMELINE";
inline constexpr std::string_view kSignal = "SIGNAL";
inline constexpr std::string_view kAnnotation = "ANNOTATION";
inline constexpr std::string_view kAnchor = "ANCHOR";
inline constexpr std::string_view kMetadata = "METADATA";

// Auxiliary tables of the embedded store.
inline constexpr std::string_view kKstar = "KSTAR";
inline constexpr std::string_view kKstarArray = "KSTAR_ARRAY";
inline constexpr std::string_view kIndexCatalog = "KSTAR_CATALOG";
inline constexpr std::string_view kVersions = "VERSIONS";
inline constexpr std::string_view kPolicy = "POLICY";
inline constexpr std::string_view kAnnotationIdColumn = "ANNOTATIONID";

const TableDef& kstar_table();
const TableDef& kstar_array_table();

/// True for names reserved by the store (fixed and auxiliary tables).
bool is_reserved_table(std::string_view name);

/// DDL for a corpus feature table with the given feature columns.
std::string feature_table_ddl(std::string_view corpus, std::span<const std::string> columns);

/// SQL identifier: bare if it is a plain identifier, double-quoted otherwise.
std::string sql_identifier(std::string_view name);

/// Rows of one AGSet. `tables` is keyed by fixed table name; `features` has
/// header ANNOTATIONID followed by one column per feature name.
struct RowSet {
  std::map<std::string, tsv::Document, std::less<>> tables;
  tsv::Document features;
};

/// Converts an AGSet to rows. Only features named in `feature_columns` are
/// written; the feature table's columns follow that order.
RowSet to_rows(const AGSet& agset, std::span<const std::string> feature_columns);
RowSet to_rows(const AGSet& agset);

/// Rebuilds an AGSet from rows that all belong to a single AGSet. Throws
/// MalformedInput if the AGSET table does not hold exactly one row or a row
/// references an unknown parent.
AGSet from_rows(const RowSet& rows);

/// Throws StorageFailure naming the first value that exceeds its declared
/// VARCHAR/CHAR length.
void check_lengths(const RowSet& rows);

std::string join_signals(const std::vector<std::string>& ids);
std::vector<std::string> split_signals(std::string_view joined);

}  // namespace agdb::schema
