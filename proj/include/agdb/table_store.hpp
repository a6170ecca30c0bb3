#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "agdb/tsv.hpp"

namespace agdb {

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<tsv::Row> rows;

  std::optional<std::size_t> find_column(std::string_view column) const;
  /// Throws StorageFailure if the column does not exist.
  std::size_t column(std::string_view column) const;
};

/// Embedded table store. Tables live in memory; a file-backed store mirrors
/// each table to `<root>/<TABLE>.tsv` and each corpus feature table to
/// `<root>/<corpus>.feature.tsv`. Writes reach disk on flush(), which only
/// rewrites tables touched through the mutable accessors.
///
/// The store itself does no locking; operations in relstore take mutex() as
/// shared for reads and exclusive for writes.
class TableStore {
 public:
  static TableStore in_memory();
  /// Opens (creating if needed) a store under `root`. Throws StorageFailure
  /// if a fixed table file has the wrong header.
  static TableStore open(const std::filesystem::path& root);
  /// Opens an existing store without ever writing to it; flush() of a
  /// modified read-only store throws StorageFailure.
  static TableStore open_read_only(const std::filesystem::path& root);

  TableStore(TableStore&&) noexcept;
  TableStore& operator=(TableStore&&) noexcept;
  ~TableStore();

  bool file_backed() const { return root_.has_value(); }
  bool read_only() const { return read_only_; }
  const std::optional<std::filesystem::path>& root() const { return root_; }

  bool has_table(std::string_view name) const;
  const Table& table(std::string_view name) const;
  /// Mutable access marks the table dirty.
  Table& mutable_table(std::string_view name);
  Table& create_table(std::string name, std::vector<std::string> columns);

  bool has_feature_table(std::string_view corpus) const;
  const Table& feature_table(std::string_view corpus) const;
  Table& mutable_feature_table(std::string_view corpus);
  Table& create_feature_table(std::string corpus, std::vector<std::string> columns);
  void drop_feature_table(std::string_view corpus);
  std::vector<std::string> corpora() const;

  std::vector<std::string> table_names() const;

  /// Writes dirty tables to disk (no-op for in-memory stores).
  void flush();

  std::shared_mutex& mutex() const { return *mutex_; }

 private:
  TableStore();
  void load(const std::filesystem::path& root);

  std::optional<std::filesystem::path> root_;
  std::map<std::string, Table, std::less<>> tables_;
  std::map<std::string, Table, std::less<>> features_;
  std::set<std::string, std::less<>> dirty_tables_;
  std::set<std::string, std::less<>> dirty_features_;
  std::set<std::string, std::less<>> dropped_features_;
  std::unique_ptr<std::shared_mutex> mutex_;
  bool read_only_ = false;
};

/// Rejects corpus names that cannot name a feature table file or collide
/// with a reserved table. Throws StorageFailure.
void check_corpus_name(std::string_view corpus);

}  // namespace agdb
