#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "agdb/closure.hpp"
#include "agdb/connect.hpp"
#include "agdb/engine.hpp"
#include "agdb/model.hpp"
#include "agdb/plan.hpp"
#include "agdb/table_store.hpp"

namespace agdb {

/// Facade over one opened store, the surface the scripting wrappers expose.
/// A session is confined to one thread; every call after close() throws
/// ClosedHandle.
class Session {
 public:
  /// Resolves a connect string or bare DSN name and opens the store it names.
  static Session open(std::string_view connect_string,
                      const std::optional<std::filesystem::path>& config = {});
  /// Session over an already opened store (tests, embedding).
  explicit Session(TableStore store, ConnectSpec spec = {});

  AGSet load(std::string_view agset_id) const;
  void store(const AGSet& agset);
  ResultSet query(std::string_view text, QueryMode mode = QueryMode::kstar,
                  const std::optional<std::string>& domain = std::nullopt) const;
  IndexStats build_index(std::string_view type, const std::optional<std::string>& domain, IndexKind kind);

  void close();
  bool is_open() const { return store_.has_value(); }
  const ConnectSpec& spec() const { return spec_; }

 private:
  const TableStore& checked() const;
  TableStore& checked();

  std::optional<TableStore> store_;
  ConnectSpec spec_;
};

/// Version string reported by the wrappers.
std::string_view library_version();

}  // namespace agdb
