#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "agdb/model.hpp"
#include "agdb/table_store.hpp"

namespace agdb {

struct StoreOptions {
  /// When set, the column policy of (agset id, role) is enforced: storing
  /// fails with PolicyViolation if any readonly feature value would change.
  std::optional<std::string> role;
};

/// Writes all rows of `agset` to the seven fixed tables and its corpus
/// feature table, replacing any earlier copy of the same AGSet. The feature
/// table is evolved to the AGSet's feature names first. Storing invalidates
/// every closure index in the store.
///
/// Throws StorageFailure if the AGSet is invalid, exceeds a column length,
/// reuses a primary key owned by another AGSet, or has two feature names that
/// differ only in case.
void store_agset(TableStore& store, const AGSet& agset, const StoreOptions& options = {});

/// Throws UnknownAgset if no AGSET row has this id.
AGSet load_agset(const TableStore& store, std::string_view agset_id);

std::vector<std::string> list_agsets(const TableStore& store);

struct ColumnDiff {
  std::vector<std::string> added;
  std::vector<std::string> dropped;

  bool operator==(const ColumnDiff&) const = default;
};

/// Makes the corpus feature table carry exactly `feature_names` as columns.
/// Shared columns keep their values; dropped columns lose theirs.
ColumnDiff evolve_feature_table(TableStore& store, std::string_view corpus,
                                const std::set<std::string>& feature_names);

struct ColumnPolicy {
  std::string corpus;
  std::string role;
  std::set<std::string> readonly_columns;

  bool operator==(const ColumnPolicy&) const = default;
};

/// Replaces the policy of (corpus, role). Throws UnknownCorpus / UnknownFeature
/// if the corpus or one of the columns does not exist.
void set_column_policy(TableStore& store, const ColumnPolicy& policy);
ColumnPolicy column_policy(const TableStore& store, std::string_view corpus, std::string_view role);

/// Applies `changes` to one annotation's features as a compare-and-swap on
/// the row version. Returns the new version. Nothing changes on failure.
std::uint64_t update_features(TableStore& store, std::string_view annotation_id,
                              const FeatureRecord& changes, std::string_view role,
                              std::uint64_t expected_version);

/// Current version of an annotation row. Throws UnknownAnnotation.
std::uint64_t row_version(const TableStore& store, std::string_view annotation_id);
FeatureRecord read_features(const TableStore& store, std::string_view annotation_id);

/// ANSI SQL script: DDL for the seven fixed tables, the corpus feature tables
/// and (if present) the closure tables, followed by INSERTs for all rows.
std::string emit_sql(const TableStore& store);
std::string emit_sql(const AGSet& agset);

}  // namespace agdb
