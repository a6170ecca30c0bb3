#include "agdb/session.hpp"

#include "agdb/agql.hpp"
#include "agdb/error.hpp"
#include "agdb/relstore.hpp"

namespace agdb {

Session Session::open(std::string_view connect_string, const std::optional<std::filesystem::path>& config) {
  auto rc = resolve_connection(connect_string, config);
  if (rc.spec.backend == Backend::sql_emit)
    throw Error(ErrorCode::StorageFailure, "the sql-emit backend has no store to open");
  return Session(TableStore::open(rc.root), rc.spec);
}

Session::Session(TableStore store, ConnectSpec spec) : store_(std::move(store)), spec_(std::move(spec)) {}

const TableStore& Session::checked() const {
  if (!store_) throw Error(ErrorCode::ClosedHandle, "session is closed");
  return *store_;
}

TableStore& Session::checked() {
  if (!store_) throw Error(ErrorCode::ClosedHandle, "session is closed");
  return *store_;
}

AGSet Session::load(std::string_view agset_id) const { return load_agset(checked(), agset_id); }

void Session::store(const AGSet& agset) { store_agset(checked(), agset); }

ResultSet Session::query(std::string_view text, QueryMode mode, const std::optional<std::string>& domain) const {
  return run_query(text, checked(), CompileOptions{mode, domain, std::nullopt});
}

IndexStats Session::build_index(std::string_view type, const std::optional<std::string>& domain, IndexKind kind) {
  return agdb::build_index(checked(), kind, type, domain);
}

void Session::close() {
  if (store_) store_->flush();
  store_.reset();
}

std::string_view library_version() { return AGDB_VERSION; }

}  // namespace agdb
