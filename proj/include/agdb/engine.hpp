#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "agdb/agql.hpp"
#include "agdb/bit_matrix.hpp"
#include "agdb/model.hpp"
#include "agdb/plan.hpp"
#include "agdb/table_store.hpp"

namespace agdb {

/// Query answers: one row per distinct binding, sorted lexicographically.
struct ResultSet {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  bool operator==(const ResultSet&) const = default;
};

/// Read-only, interned copy of the tables a plan reads. Built once per store
/// state and shared by any number of concurrent executions.
class Snapshot {
 public:
  using Id = std::uint32_t;
  static constexpr Id kNull = UINT32_MAX;

  explicit Snapshot(const TableStore& store);

  std::optional<Id> lookup(std::string_view text) const;
  const std::string& text(Id id) const { return strings_[id]; }

  struct AnnotationRow {
    Id id, agset, ag, start, end, type;
  };
  struct AnchorRow {
    Id id, ag;
    std::uint32_t number;  // anchor_num - 1
  };
  struct FeatureTable {
    std::vector<std::string> columns;  // without ANNOTATIONID
    std::unordered_map<Id, std::vector<Id>> rows;
  };

  const std::vector<AnnotationRow>& annotations() const { return annotations_; }
  const std::vector<std::uint32_t>& annotations_of_type(Id type) const;
  const FeatureTable* feature_table(std::string_view corpus) const;
  const std::vector<std::pair<Id, Id>>& kstar(Id tag) const;
  const BitMatrix* matrix(Id tag, Id ag) const;
  const std::unordered_map<Id, BitMatrix>& matrices(Id tag) const;
  const std::vector<AnchorRow>& anchors() const { return anchors_; }
  const AnchorRow* anchor(Id id) const;
  const Catalog& catalog() const { return catalog_; }

 private:
  Id intern(std::string_view text);

  std::vector<std::string> strings_;
  std::unordered_map<std::string, Id> ids_;
  std::vector<AnnotationRow> annotations_;
  std::unordered_map<Id, std::vector<std::uint32_t>> by_type_;
  std::map<std::string, FeatureTable, std::less<>> features_;
  std::unordered_map<Id, std::vector<std::pair<Id, Id>>> kstar_;
  std::unordered_map<Id, std::unordered_map<Id, BitMatrix>> arrays_;
  std::vector<AnchorRow> anchors_;
  std::unordered_map<Id, std::uint32_t> anchor_index_;
  Catalog catalog_;
};

struct ExecuteOptions {
  /// Execution throws Timeout once this point has passed.
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

ResultSet execute(const Plan& plan, const Snapshot& snapshot, const ExecuteOptions& options = {});
ResultSet execute(const Plan& plan, const TableStore& store, const ExecuteOptions& options = {});

/// Compiles against the store's catalog and executes.
ResultSet run_query(std::string_view query_text, const TableStore& store, const CompileOptions& options);

/// Exhaustive matcher: backtracks over clauses and enumerates arc paths for
/// starred arcs, including zero-length ones at anchors incident to an arc of
/// the clause type. With `domain`, a starred segment A..B must also lie
/// inside one annotation of the domain type.
ResultSet oracle_match(const agql::QueryAst& ast, const AGSet& agset,
                       const std::optional<std::string>& domain = std::nullopt);

}  // namespace agdb
