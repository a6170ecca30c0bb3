#include "agdb/relstore.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "agdb/bit_matrix.hpp"
#include "agdb/error.hpp"
#include "agdb/schema.hpp"

namespace agdb {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) { return upper(a) == upper(b); }

std::uint64_t parse_version(const tsv::Cell& cell) {
  std::uint64_t v = 0;
  if (!cell) throw Error(ErrorCode::StorageFailure, "NULL row version");
  auto [p, ec] = std::from_chars(cell->data(), cell->data() + cell->size(), v);
  if (ec != std::errc{} || p != cell->data() + cell->size())
    throw Error(ErrorCode::StorageFailure, "bad row version '" + *cell + "'");
  return v;
}

// Rows of `table` whose AGSETID column equals `agset_id`.
std::vector<tsv::Row> rows_of(const Table& table, std::string_view agset_id) {
  auto col = table.column("AGSETID");
  std::vector<tsv::Row> out;
  for (const auto& row : table.rows)
    if (row[col] && *row[col] == agset_id) out.push_back(row);
  return out;
}

bool agset_exists(const TableStore& store, std::string_view agset_id) {
  const auto& t = store.table(schema::kAgset);
  return std::any_of(t.rows.begin(), t.rows.end(),
                     [&](const tsv::Row& r) { return r[0] && *r[0] == agset_id; });
}

ColumnDiff evolve_unlocked(TableStore& store, std::string_view corpus,
                           const std::set<std::string>& names) {
  if (!store.has_feature_table(corpus)) {
    std::vector<std::string> columns{std::string(schema::kAnnotationIdColumn)};
    columns.insert(columns.end(), names.begin(), names.end());
    store.create_feature_table(std::string(corpus), std::move(columns));
    return ColumnDiff{{names.begin(), names.end()}, {}};
  }
  Table& table = store.mutable_feature_table(corpus);
  ColumnDiff diff;
  std::vector<std::size_t> keep{0};
  for (std::size_t c = 1; c < table.columns.size(); ++c) {
    if (names.count(table.columns[c]))
      keep.push_back(c);
    else
      diff.dropped.push_back(table.columns[c]);
  }
  for (const auto& name : names)
    if (!table.find_column(name)) diff.added.push_back(name);
  if (diff.added.empty() && diff.dropped.empty()) return diff;

  std::vector<std::string> columns;
  for (auto c : keep) columns.push_back(table.columns[c]);
  columns.insert(columns.end(), diff.added.begin(), diff.added.end());
  for (auto& row : table.rows) {
    tsv::Row next;
    next.reserve(columns.size());
    for (auto c : keep) next.push_back(std::move(row[c]));
    next.resize(columns.size());
    row = std::move(next);
  }
  table.columns = std::move(columns);
  return diff;
}

void clear_indexes(TableStore& store) {
  for (auto name : {schema::kKstar, schema::kKstarArray, schema::kIndexCatalog}) {
    auto& t = store.mutable_table(name);
    if (!t.rows.empty()) t.rows.clear();
  }
}

std::string describe(const std::vector<Violation>& violations) {
  std::string out;
  for (std::size_t i = 0; i < violations.size() && i < 3; ++i) {
    if (i) out += "; ";
    out += violations[i].object_id + ": " + violations[i].message;
  }
  if (violations.size() > 3) out += "; ...";
  return out;
}

std::set<std::string> readonly_for(const TableStore& store, std::string_view corpus,
                                   std::string_view role) {
  const auto& t = store.table(schema::kPolicy);
  std::set<std::string> out;
  for (const auto& r : t.rows)
    if (r[0] && *r[0] == corpus && r[1] && *r[1] == role && r[2]) out.insert(*r[2]);
  return out;
}

bool is_readonly(const std::set<std::string>& readonly, std::string_view column) {
  return std::any_of(readonly.begin(), readonly.end(),
                     [&](const std::string& c) { return iequals(c, column); });
}

std::map<std::string, tsv::Row> feature_rows_by_id(const TableStore& store, std::string_view corpus) {
  std::map<std::string, tsv::Row> out;
  if (!store.has_feature_table(corpus)) return out;
  for (const auto& row : store.feature_table(corpus).rows)
    if (row[0]) out.emplace(*row[0], row);
  return out;
}

void check_policy_on_store(const TableStore& store, const AGSet& agset, std::string_view role) {
  auto readonly = readonly_for(store, agset.id, role);
  if (readonly.empty() || !store.has_feature_table(agset.id)) return;
  const auto& table = store.feature_table(agset.id);
  auto old_rows = feature_rows_by_id(store, agset.id);

  std::map<std::string, const Annotation*> fresh;
  for (const auto& ag : agset.ags)
    for (const auto& ann : ag.annotations) fresh.emplace(ann.id, &ann);

  auto old_value = [&](const std::string& ann_id, const std::string& col) -> tsv::Cell {
    auto it = old_rows.find(ann_id);
    if (it == old_rows.end()) return std::nullopt;
    for (std::size_t c = 1; c < table.columns.size(); ++c)
      if (iequals(table.columns[c], col)) return it->second[c];
    return std::nullopt;
  };
  auto new_value = [&](const std::string& ann_id, const std::string& col) -> tsv::Cell {
    auto it = fresh.find(ann_id);
    if (it == fresh.end()) return std::nullopt;
    for (const auto& [name, value] : it->second->features)
      if (iequals(name, col)) return value;
    return std::nullopt;
  };

  std::set<std::string> ids;
  for (const auto& [id, row] : old_rows) ids.insert(id);
  for (const auto& [id, ann] : fresh) ids.insert(id);
  for (const auto& col : readonly)
    for (const auto& id : ids)
      if (old_value(id, col) != new_value(id, col))
        throw Error(ErrorCode::PolicyViolation, "role " + std::string(role) + " may not modify " +
                                                    col + " of annotation " + id);
}

std::string sql_literal(const tsv::Cell& cell) {
  if (!cell) return "NULL";
  std::string out = "'";
  for (char c : *cell) {
    if (c == '\'') out += '\'';
    out += c;
  }
  out += '\'';
  return out;
}

std::string insert_statement(std::string_view table, const std::vector<std::string>& columns,
                             const tsv::Row& row, const std::set<std::size_t>& numeric = {}) {
  std::string out = "INSERT INTO " + schema::sql_identifier(table) + " (";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ", ";
    out += schema::sql_identifier(columns[i]);
  }
  out += ") VALUES (";
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ", ";
    out += (numeric.count(i) && row[i]) ? *row[i] : sql_literal(row[i]);
  }
  out += ");\n";
  return out;
}

std::string array_literal(const BitMatrix& m) {
  std::string out = "{";
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) out += ',';
    out += '{';
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (j) out += ',';
      out += m.test(i, j) ? 't' : 'f';
    }
    out += '}';
  }
  out += '}';
  return out;
}

std::string emit_unlocked(const TableStore& store) {
  std::string out;
  for (const auto& def : schema::fixed_tables()) {
    out += def.ddl;
    out += ";\n\n";
  }
  for (const auto& corpus : store.corpora()) {
    const auto& t = store.feature_table(corpus);
    std::vector<std::string> cols(t.columns.begin() + 1, t.columns.end());
    out += schema::feature_table_ddl(corpus, cols);
    out += ";\n\n";
  }
  const bool have_index = !store.table(schema::kIndexCatalog).rows.empty() ||
                          !store.table(schema::kKstar).rows.empty() ||
                          !store.table(schema::kKstarArray).rows.empty();
  if (have_index) {
    out += schema::kstar_table().ddl;
    out += ";\n\n";
    out += schema::kstar_array_table().ddl;
    out += ";\n\n";
  }

  for (const auto& def : schema::fixed_tables()) {
    const auto& t = store.table(def.name);
    std::set<std::size_t> numeric;
    if (def.name == schema::kAnchor) numeric.insert(def.column_index("OFFSET"));
    for (const auto& row : t.rows) out += insert_statement(def.name, t.columns, row, numeric);
  }
  for (const auto& corpus : store.corpora()) {
    const auto& t = store.feature_table(corpus);
    for (const auto& row : t.rows) out += insert_statement(corpus, t.columns, row);
  }
  if (have_index) {
    for (const auto& row : store.table(schema::kKstar).rows)
      out += insert_statement("Kstar", {"StartAnchor", "EndAnchor", "Type"}, row);
    for (const auto& row : store.table(schema::kKstarArray).rows) {
      tsv::Cell literal;
      if (row[2]) literal = array_literal(BitMatrix::from_hex(*row[2]));
      out += insert_statement("Kstar_array", {"AGId", "A", "Type"}, {row[0], literal, row[1]});
    }
  }
  return out;
}

}  // namespace

void store_agset(TableStore& store, const AGSet& agset, const StoreOptions& options) {
  std::unique_lock lock(store.mutex());

  if (auto violations = validate(agset); !violations.empty())
    throw Error(ErrorCode::StorageFailure, "invalid AGSet " + agset.id + ": " + describe(violations));
  check_corpus_name(agset.id);

  auto names = agset.feature_names();
  {
    std::map<std::string, std::string> folded;
    for (const auto& n : names) {
      auto key = upper(n);
      if (key == schema::kAnnotationIdColumn)
        throw Error(ErrorCode::StorageFailure, "feature name " + n + " collides with ANNOTATIONID");
      auto [it, fresh] = folded.emplace(key, n);
      if (!fresh)
        throw Error(ErrorCode::StorageFailure,
                    "feature names " + it->second + " and " + n + " differ only in case");
    }
  }

  auto rows = schema::to_rows(agset, names);
  schema::check_lengths(rows);

  // Primary keys are global across the store; ids owned by other AGSets may
  // not be reused.
  struct KeyCheck {
    std::string_view table;
    std::vector<std::string_view> key_columns;
  };
  const KeyCheck keys[] = {{schema::kAg, {"AGID"}},
                           {schema::kTimeline, {"TIMELINEID"}},
                           {schema::kSignal, {"SIGNALID"}},
                           {schema::kAnnotation, {"ANNOTATIONID"}},
                           {schema::kAnchor, {"ANCHORID"}},
                           {schema::kMetadata, {"ID", "NAME"}}};
  for (const auto& check : keys) {
    const auto& t = store.table(check.table);
    auto agcol = t.column("AGSETID");
    std::vector<std::size_t> cols;
    for (auto c : check.key_columns) cols.push_back(t.column(c));
    auto key_of = [&](const tsv::Row& r) {
      std::string k;
      for (auto c : cols) {
        k += r[c].value_or("");
        k += '\x1f';
      }
      return k;
    };
    std::unordered_set<std::string> taken;
    for (const auto& r : t.rows)
      if (!(r[agcol] && *r[agcol] == agset.id)) taken.insert(key_of(r));
    for (const auto& r : rows.tables.at(std::string(check.table)).rows)
      if (taken.count(key_of(r)))
        throw Error(ErrorCode::StorageFailure, std::string(check.table) + " key " + r[cols[0]].value_or("") +
                                                   " is owned by another AGSet");
  }

  if (options.role) check_policy_on_store(store, agset, *options.role);

  // Versions of annotations being replaced.
  std::unordered_map<std::string, std::uint64_t> old_versions;
  {
    std::unordered_set<std::string> old_ids;
    const auto& ann = store.table(schema::kAnnotation);
    auto idcol = ann.column("ANNOTATIONID");
    for (const auto& r : rows_of(ann, agset.id)) old_ids.insert(*r[idcol]);
    for (const auto& r : store.table(schema::kVersions).rows)
      if (r[0] && old_ids.count(*r[0])) old_versions.emplace(*r[0], parse_version(r[1]));
  }

  for (const auto& def : schema::fixed_tables()) {
    auto& t = store.mutable_table(def.name);
    auto col = t.column("AGSETID");
    std::erase_if(t.rows, [&](const tsv::Row& r) { return r[col] && *r[col] == agset.id; });
    auto& fresh = rows.tables.at(std::string(def.name)).rows;
    t.rows.insert(t.rows.end(), fresh.begin(), fresh.end());
  }

  evolve_unlocked(store, agset.id, std::set<std::string>(names.begin(), names.end()));
  auto& ftable = store.mutable_feature_table(agset.id);
  ftable.rows.clear();
  std::vector<std::size_t> source_of(ftable.columns.size());
  for (std::size_t c = 0; c < ftable.columns.size(); ++c) {
    auto it = std::find(rows.features.header.begin(), rows.features.header.end(), ftable.columns[c]);
    source_of[c] = static_cast<std::size_t>(it - rows.features.header.begin());
  }
  for (const auto& r : rows.features.rows) {
    tsv::Row out(ftable.columns.size());
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = r[source_of[c]];
    ftable.rows.push_back(std::move(out));
  }

  auto& versions = store.mutable_table(schema::kVersions);
  std::erase_if(versions.rows, [&](const tsv::Row& r) { return r[0] && old_versions.count(*r[0]); });
  for (const auto& ag : agset.ags)
    for (const auto& ann : ag.annotations) {
      auto it = old_versions.find(ann.id);
      auto v = it == old_versions.end() ? std::uint64_t{1} : it->second + 1;
      versions.rows.push_back({ann.id, std::to_string(v)});
    }

  clear_indexes(store);
  store.flush();
}

AGSet load_agset(const TableStore& store, std::string_view agset_id) {
  std::shared_lock lock(store.mutex());
  if (!agset_exists(store, agset_id))
    throw Error(ErrorCode::UnknownAgset, std::string(agset_id));
  schema::RowSet rows;
  for (const auto& def : schema::fixed_tables()) {
    const auto& t = store.table(def.name);
    rows.tables[std::string(def.name)] = tsv::Document{t.columns, rows_of(t, agset_id)};
  }
  if (store.has_feature_table(agset_id)) {
    const auto& f = store.feature_table(agset_id);
    rows.features = tsv::Document{f.columns, f.rows};
  }
  try {
    return schema::from_rows(rows);
  } catch (const Error& e) {
    throw Error(ErrorCode::StorageFailure, e.detail());
  }
}

std::vector<std::string> list_agsets(const TableStore& store) {
  std::shared_lock lock(store.mutex());
  std::vector<std::string> out;
  for (const auto& r : store.table(schema::kAgset).rows)
    if (r[0]) out.push_back(*r[0]);
  return out;
}

ColumnDiff evolve_feature_table(TableStore& store, std::string_view corpus,
                                const std::set<std::string>& feature_names) {
  std::unique_lock lock(store.mutex());
  for (const auto& n : feature_names)
    if (!is_valid_feature_name(n) || iequals(n, schema::kAnnotationIdColumn))
      throw Error(ErrorCode::StorageFailure, "invalid feature column '" + n + "'");
  auto diff = evolve_unlocked(store, corpus, feature_names);
  store.flush();
  return diff;
}

void set_column_policy(TableStore& store, const ColumnPolicy& policy) {
  std::unique_lock lock(store.mutex());
  if (!store.has_feature_table(policy.corpus))
    throw Error(ErrorCode::UnknownCorpus, policy.corpus);
  const auto& f = store.feature_table(policy.corpus);
  for (const auto& col : policy.readonly_columns) {
    bool present = std::any_of(f.columns.begin() + 1, f.columns.end(),
                               [&](const std::string& c) { return iequals(c, col); });
    if (!present) throw Error(ErrorCode::UnknownFeature, policy.corpus + "." + col);
  }
  auto& t = store.mutable_table(schema::kPolicy);
  std::erase_if(t.rows, [&](const tsv::Row& r) {
    return r[0] && *r[0] == policy.corpus && r[1] && *r[1] == policy.role;
  });
  for (const auto& col : policy.readonly_columns) t.rows.push_back({policy.corpus, policy.role, col});
  store.flush();
}

ColumnPolicy column_policy(const TableStore& store, std::string_view corpus, std::string_view role) {
  std::shared_lock lock(store.mutex());
  return ColumnPolicy{std::string(corpus), std::string(role), readonly_for(store, corpus, role)};
}

namespace {

struct AnnotationLocation {
  std::string agset_id;
  std::size_t version_row;
};

AnnotationLocation locate(const TableStore& store, std::string_view annotation_id) {
  const auto& ann = store.table(schema::kAnnotation);
  auto idcol = ann.column("ANNOTATIONID");
  auto setcol = ann.column("AGSETID");
  for (const auto& r : ann.rows) {
    if (!(r[idcol] && *r[idcol] == annotation_id)) continue;
    const auto& versions = store.table(schema::kVersions).rows;
    for (std::size_t i = 0; i < versions.size(); ++i)
      if (versions[i][0] && *versions[i][0] == annotation_id)
        return AnnotationLocation{*r[setcol], i};
    throw Error(ErrorCode::StorageFailure, "annotation " + std::string(annotation_id) + " has no version row");
  }
  throw Error(ErrorCode::UnknownAnnotation, std::string(annotation_id));
}

}  // namespace

std::uint64_t update_features(TableStore& store, std::string_view annotation_id,
                              const FeatureRecord& changes, std::string_view role,
                              std::uint64_t expected_version) {
  std::unique_lock lock(store.mutex());
  auto loc = locate(store, annotation_id);
  for (const auto& [name, value] : changes)
    if (!is_valid_feature_name(name)) throw Error(ErrorCode::InvalidFeatureName, name);

  auto readonly = readonly_for(store, loc.agset_id, role);
  for (const auto& [name, value] : changes)
    if (is_readonly(readonly, name))
      throw Error(ErrorCode::PolicyViolation,
                  "role " + std::string(role) + " may not modify " + name);

  auto current = parse_version(store.table(schema::kVersions).rows[loc.version_row][1]);
  if (current != expected_version)
    throw Error(ErrorCode::VersionConflict, std::string(annotation_id) + ": expected version " +
                                                std::to_string(expected_version) + ", current " +
                                                std::to_string(current));

  // Resolve target columns before mutating anything.
  std::vector<std::string> to_add;
  if (store.has_feature_table(loc.agset_id)) {
    const auto& f = store.feature_table(loc.agset_id);
    for (const auto& [name, value] : changes) {
      if (f.find_column(name)) continue;
      for (std::size_t c = 0; c < f.columns.size(); ++c)
        if (iequals(f.columns[c], name))
          throw Error(ErrorCode::StorageFailure,
                      "feature " + name + " differs only in case from column " + f.columns[c]);
      to_add.push_back(name);
    }
  } else {
    for (const auto& [name, value] : changes) to_add.push_back(name);
  }

  if (!store.has_feature_table(loc.agset_id))
    store.create_feature_table(loc.agset_id, {std::string(schema::kAnnotationIdColumn)});
  auto& f = store.mutable_feature_table(loc.agset_id);
  for (auto& name : to_add) {
    f.columns.push_back(name);
    for (auto& row : f.rows) row.emplace_back();
  }
  auto row = std::find_if(f.rows.begin(), f.rows.end(),
                          [&](const tsv::Row& r) { return r[0] && *r[0] == annotation_id; });
  if (row == f.rows.end()) {
    f.rows.push_back(tsv::Row(f.columns.size()));
    row = std::prev(f.rows.end());
    (*row)[0] = std::string(annotation_id);
  }
  for (const auto& [name, value] : changes) (*row)[f.column(name)] = value;

  auto& versions = store.mutable_table(schema::kVersions);
  versions.rows[loc.version_row][1] = std::to_string(current + 1);
  store.flush();
  return current + 1;
}

std::uint64_t row_version(const TableStore& store, std::string_view annotation_id) {
  std::shared_lock lock(store.mutex());
  auto loc = locate(store, annotation_id);
  return parse_version(store.table(schema::kVersions).rows[loc.version_row][1]);
}

FeatureRecord read_features(const TableStore& store, std::string_view annotation_id) {
  std::shared_lock lock(store.mutex());
  auto loc = locate(store, annotation_id);
  FeatureRecord out;
  if (!store.has_feature_table(loc.agset_id)) return out;
  const auto& f = store.feature_table(loc.agset_id);
  for (const auto& row : f.rows) {
    if (!(row[0] && *row[0] == annotation_id)) continue;
    for (std::size_t c = 1; c < f.columns.size(); ++c)
      if (row[c]) out.emplace(f.columns[c], *row[c]);
  }
  return out;
}

std::string emit_sql(const TableStore& store) {
  std::shared_lock lock(store.mutex());
  return emit_unlocked(store);
}

std::string emit_sql(const AGSet& agset) {
  auto store = TableStore::in_memory();
  store_agset(store, agset);
  return emit_sql(store);
}

}  // namespace agdb
