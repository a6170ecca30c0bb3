#include "agdb/table_store.hpp"

#include <fstream>
#include <sstream>

#include "agdb/error.hpp"
#include "agdb/schema.hpp"

namespace agdb {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kFeatureSuffix = ".feature.tsv";
constexpr std::string_view kTableSuffix = ".tsv";

std::vector<std::string> auxiliary_columns(std::string_view name) {
  if (name == schema::kKstar) return schema::kstar_table().column_names();
  if (name == schema::kKstarArray) return schema::kstar_array_table().column_names();
  if (name == schema::kIndexCatalog) return {"KIND", "TYPE"};
  if (name == schema::kVersions) return {"ANNOTATIONID", "VERSION"};
  if (name == schema::kPolicy) return {"CORPUS", "ROLE", "COLUMNNAME"};
  return {};
}

constexpr std::string_view kAuxiliary[] = {schema::kKstar, schema::kKstarArray,
                                           schema::kIndexCatalog, schema::kVersions,
                                           schema::kPolicy};

Table read_table(const fs::path& file, std::string name) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::StorageFailure, "cannot read " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  tsv::Document doc;
  try {
    doc = tsv::read(buf.str());
  } catch (const Error& e) {
    throw Error(ErrorCode::StorageFailure, file.string() + ": " + e.detail());
  }
  return Table{std::move(name), std::move(doc.header), std::move(doc.rows)};
}

void write_table(const fs::path& file, const Table& table) {
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + tmp.string());
    out << tsv::format_row(tsv::Row(table.columns.begin(), table.columns.end()));
    for (const auto& row : table.rows) out << tsv::format_row(row);
    if (!out) throw Error(ErrorCode::StorageFailure, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, file, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "rename " + tmp.string() + ": " + ec.message());
}

}  // namespace

std::optional<std::size_t> Table::find_column(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == column) return i;
  return std::nullopt;
}

std::size_t Table::column(std::string_view column) const {
  if (auto i = find_column(column)) return *i;
  throw Error(ErrorCode::StorageFailure, "table " + name + " has no column " + std::string(column));
}

TableStore::TableStore() : mutex_(std::make_unique<std::shared_mutex>()) {
  for (const auto& def : schema::fixed_tables())
    tables_.emplace(std::string(def.name), Table{std::string(def.name), def.column_names(), {}});
  for (auto name : kAuxiliary)
    tables_.emplace(std::string(name), Table{std::string(name), auxiliary_columns(name), {}});
}

TableStore::TableStore(TableStore&&) noexcept = default;
TableStore& TableStore::operator=(TableStore&&) noexcept = default;
TableStore::~TableStore() = default;

TableStore TableStore::in_memory() { return TableStore(); }

void TableStore::load(const fs::path& root) {
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    auto fname = entry.path().filename().string();
    if (fname.ends_with(kFeatureSuffix)) {
      auto corpus = fname.substr(0, fname.size() - kFeatureSuffix.size());
      features_[corpus] = read_table(entry.path(), corpus);
    } else if (fname.ends_with(kTableSuffix)) {
      auto name = fname.substr(0, fname.size() - kTableSuffix.size());
      auto table = read_table(entry.path(), name);
      auto it = tables_.find(name);
      if (it != tables_.end() && table.columns != it->second.columns)
        throw Error(ErrorCode::StorageFailure,
                    entry.path().string() + " does not have the columns of table " + name);
      tables_[name] = std::move(table);
    }
  }
}

TableStore TableStore::open(const fs::path& root) {
  TableStore store;
  store.root_ = root;
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error(ErrorCode::StorageFailure, "cannot create " + root.string() + ": " + ec.message());
  store.load(root);
  // Materialize any table files that did not exist yet.
  for (const auto& [name, table] : store.tables_)
    if (!fs::exists(root / (name + std::string(kTableSuffix)))) store.dirty_tables_.insert(name);
  store.flush();
  return store;
}

TableStore TableStore::open_read_only(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(ErrorCode::StorageFailure, "no store at " + root.string());
  TableStore store;
  store.root_ = root;
  store.read_only_ = true;
  store.load(root);
  return store;
}

bool TableStore::has_table(std::string_view name) const { return tables_.count(name) != 0; }

const Table& TableStore::table(std::string_view name) const {
  auto it = tables_.find(name);
  if (it == tables_.end()) throw Error(ErrorCode::StorageFailure, "no table " + std::string(name));
  return it->second;
}

Table& TableStore::mutable_table(std::string_view name) {
  auto it = tables_.find(name);
  if (it == tables_.end()) throw Error(ErrorCode::StorageFailure, "no table " + std::string(name));
  dirty_tables_.insert(std::string(name));
  return it->second;
}

Table& TableStore::create_table(std::string name, std::vector<std::string> columns) {
  dirty_tables_.insert(name);
  auto& t = tables_[name];
  t = Table{name, std::move(columns), {}};
  return t;
}

bool TableStore::has_feature_table(std::string_view corpus) const {
  return features_.count(corpus) != 0;
}

const Table& TableStore::feature_table(std::string_view corpus) const {
  auto it = features_.find(corpus);
  if (it == features_.end())
    throw Error(ErrorCode::StorageFailure, "no feature table for corpus " + std::string(corpus));
  return it->second;
}

Table& TableStore::mutable_feature_table(std::string_view corpus) {
  auto it = features_.find(corpus);
  if (it == features_.end())
    throw Error(ErrorCode::StorageFailure, "no feature table for corpus " + std::string(corpus));
  dirty_features_.insert(std::string(corpus));
  return it->second;
}

Table& TableStore::create_feature_table(std::string corpus, std::vector<std::string> columns) {
  check_corpus_name(corpus);
  dirty_features_.insert(corpus);
  dropped_features_.erase(corpus);
  auto& t = features_[corpus];
  t = Table{corpus, std::move(columns), {}};
  return t;
}

void TableStore::drop_feature_table(std::string_view corpus) {
  auto it = features_.find(corpus);
  if (it == features_.end()) return;
  features_.erase(it);
  dirty_features_.erase(std::string(corpus));
  dropped_features_.insert(std::string(corpus));
}

std::vector<std::string> TableStore::corpora() const {
  std::vector<std::string> out;
  for (const auto& [name, t] : features_) out.push_back(name);
  return out;
}

std::vector<std::string> TableStore::table_names() const {
  std::vector<std::string> out;
  for (const auto& [name, t] : tables_) out.push_back(name);
  return out;
}

void TableStore::flush() {
  if (read_only_ && !(dirty_tables_.empty() && dirty_features_.empty() && dropped_features_.empty()))
    throw Error(ErrorCode::StorageFailure, "store " + root_->string() + " is open read-only");
  if (!root_) {
    dirty_tables_.clear();
    dirty_features_.clear();
    dropped_features_.clear();
    return;
  }
  for (const auto& name : dirty_tables_)
    write_table(*root_ / (name + std::string(kTableSuffix)), tables_.at(name));
  for (const auto& corpus : dirty_features_)
    write_table(*root_ / (corpus + std::string(kFeatureSuffix)), features_.at(corpus));
  for (const auto& corpus : dropped_features_) {
    std::error_code ec;
    fs::remove(*root_ / (corpus + std::string(kFeatureSuffix)), ec);
  }
  dirty_tables_.clear();
  dirty_features_.clear();
  dropped_features_.clear();
}

void check_corpus_name(std::string_view corpus) {
  if (corpus.empty() || corpus.front() == '.' ||
      corpus.find_first_of("/\\\t\n\r") != std::string_view::npos ||
      corpus.find('\0') != std::string_view::npos)
    throw Error(ErrorCode::StorageFailure, "corpus name '" + std::string(corpus) +
                                               "' cannot name a feature table");
  if (schema::is_reserved_table(corpus))
    throw Error(ErrorCode::StorageFailure,
                "corpus name '" + std::string(corpus) + "' collides with a reserved table");
}

}  // namespace agdb
