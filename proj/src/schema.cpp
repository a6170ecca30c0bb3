#include "agdb/schema.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_map>

#include "agdb/error.hpp"

namespace agdb::schema {

namespace {

constexpr std::array kAgsetColumns{
    ColumnDef{"AGSETID", "VARCHAR(50)", 50, true},
    ColumnDef{"VERSION", "CHAR(10)", 10, false},
    ColumnDef{"XMLNS", "CHAR(30)", 30, false},
    ColumnDef{"XLINK", "CHAR(30)", 30, false},
};

constexpr std::array kAgColumns{
    ColumnDef{"AGID", "VARCHAR(50)", 50, true},
    ColumnDef{"AGSETID", "VARCHAR(50)", 50, true},
    ColumnDef{"TIMELINEID", "VARCHAR(50)", 50, false},
    ColumnDef{"TYPE", "CHAR(10)", 10, false},
};

constexpr std::array kTimelineColumns{
    ColumnDef{"AGSETID", "VARCHAR(50)", 50, true},
    ColumnDef{"TIMELINEID", "VARCHAR(50)", 50, true},
};

constexpr std::array kSignalColumns{
    ColumnDef{"AGSETID", "VARCHAR(50)", 50, true},
    ColumnDef{"TIMELINEID", "VARCHAR(50)", 50, true},
    ColumnDef{"SIGNALID", "VARCHAR(50)", 50, true},
    ColumnDef{"MIMECLASS", "VARCHAR(50)", 50, false},
    ColumnDef{"MIMETYPE", "VARCHAR(50)", 50, false},
    ColumnDef{"ENCODING", "VARCHAR(50)", 50, false},
    ColumnDef{"UNIT", "VARCHAR(50)", 50, false},
    ColumnDef{"XLINKTYPE", "VARCHAR(50)", 50, false},
    ColumnDef{"XLINKHREF", "VARCHAR(50)", 50, false},
    ColumnDef{"TRACK", "VARCHAR(50)", 50, false},
};

constexpr std::array kAnnotationColumns{
    ColumnDef{"AGSETID", "VARCHAR(50)", 50, true},
    ColumnDef{"AGID", "VARCHAR(50)", 50, true},
    ColumnDef{"ANNOTATIONID", "VARCHAR(50)", 50, true},
    ColumnDef{"STARTANCHOR", "VARCHAR(50)", 50, false},
    ColumnDef{"ENDANCHOR", "VARCHAR(50)", 50, false},
    ColumnDef{"TYPE", "VARCHAR(50)", 50, false},
};

constexpr std::array kAnchorColumns{
    ColumnDef{"AGSETID", "VARCHAR(50)", 50, true},
    ColumnDef{"AGID", "VARCHAR(50)", 50, true},
    ColumnDef{"ANCHORID", "VARCHAR(50)", 50, true},
    ColumnDef{"OFFSET", "FLOAT", 0, false},
    ColumnDef{"UNIT", "VARCHAR(50)", 50, false},
    ColumnDef{"SIGNALS", "VARCHAR(50)", 50, false},
};

constexpr std::array kMetadataColumns{
    ColumnDef{"AGSETID", "VARCHAR(50)", 50, true},
    ColumnDef{"AGID", "VARCHAR(50)", 50, false},
    ColumnDef{"ID", "VARCHAR(50)", 50, true},
    ColumnDef{"NAME", "VARCHAR(50)", 50, true},
    ColumnDef{"VALUE", "TEXT", 0, false},
};

constexpr std::array kKstarColumns{
    ColumnDef{"STARTANCHOR", "VARCHAR(50)", 50, false},
    ColumnDef{"ENDANCHOR", "VARCHAR(50)", 50, false},
    ColumnDef{"TYPE", "VARCHAR(20)", 20, false},
};

constexpr std::array kKstarArrayColumns{
    ColumnDef{"AGID", "VARCHAR(50)", 50, false},
    ColumnDef{"TYPE", "VARCHAR(20)", 20, false},
    ColumnDef{"A", "BOOL[][]", 0, false},
};

constexpr std::string_view kAgsetDdl = R"(CREATE TABLE AGSET (
  AGSETID     VARCHAR(50) NOT NULL,
  VERSION     CHAR(10),
  XMLNS       CHAR(30),
  XLINK       CHAR(30),
  PRIMARY KEY (AGSETID)))";

constexpr std::string_view kAgDdl = R"(CREATE TABLE AG (
  AGID        VARCHAR(50) NOT NULL,
  AGSETID     VARCHAR(50) NOT NULL,
  TIMELINEID  VARCHAR(50),
  TYPE        CHAR(10),
  PRIMARY KEY (AGID),
  FOREIGN KEY (AGSETID) REFERENCES AGSET))";

constexpr std::string_view kTimelineDdl = R"(CREATE TABLE TIMELINE (
  AGSETID     VARCHAR(50) NOT NULL,
  TIMELINEID  VARCHAR(50) NOT NULL,
  PRIMARY KEY (TIMELINEID),
  FOREIGN KEY (AGSETID) REFERENCES AGSET))";

constexpr std::string_view kSignalDdl = R"(CREATE TABLE SIGNAL (
  AGSETID     VARCHAR(50) NOT NULL,
  TIMELINEID  VARCHAR(50) NOT NULL,
  SIGNALID    VARCHAR(50) NOT NULL,
  MIMECLASS   VARCHAR(50),
  MIMETYPE    VARCHAR(50),
  ENCODING    VARCHAR(50),
  UNIT        VARCHAR(50),
  XLINKTYPE   VARCHAR(50),
  XLINKHREF   VARCHAR(50),
  TRACK       VARCHAR(50),
  PRIMARY KEY (SIGNALID),
  FOREIGN KEY (AGSETID) REFERENCES AGSET,
  FOREIGN KEY (TIMELINEID) REFERENCES TIMELINE))";

constexpr std::string_view kAnnotationDdl = R"(CREATE TABLE ANNOTATION (
  AGSETID      VARCHAR(50) NOT NULL,
  AGID         VARCHAR(50) NOT NULL,
  ANNOTATIONID VARCHAR(50) NOT NULL,
  STARTANCHOR  VARCHAR(50),
  ENDANCHOR    VARCHAR(50),
  TYPE         VARCHAR(50),
  PRIMARY KEY (ANNOTATIONID),
  FOREIGN KEY (AGID) REFERENCES AG,
  FOREIGN KEY (AGSETID) REFERENCES AGSET))";

constexpr std::string_view kAnchorDdl = R"(CREATE TABLE ANCHOR (
  AGSETID     VARCHAR(50) NOT NULL,
  AGID        VARCHAR(50) NOT NULL,
  ANCHORID    VARCHAR(50) NOT NULL,
  OFFSET      FLOAT,
  UNIT        VARCHAR(50),
  SIGNALS     VARCHAR(50),
  PRIMARY KEY (ANCHORID),
  FOREIGN KEY (AGID) REFERENCES AG,
  FOREIGN KEY (AGSETID) REFERENCES AGSET))";

constexpr std::string_view kMetadataDdl = R"(CREATE TABLE METADATA (
  AGSETID     VARCHAR(50) NOT NULL,
  AGID        VARCHAR(50),
  ID          VARCHAR(50) NOT NULL,
  NAME        VARCHAR(50) NOT NULL,
  VALUE       TEXT,
  PRIMARY KEY (ID,NAME),
  FOREIGN KEY (AGSETID) REFERENCES AGSET))";

constexpr std::string_view kKstarDdl = R"(CREATE TABLE Kstar (
  StartAnchor  VARCHAR(50),
  EndAnchor    VARCHAR(50),
  Type         VARCHAR(20),
  PRIMARY KEY (StartAnchor,EndAnchor,Type),
  FOREIGN KEY (StartAnchor,EndAnchor) REFERENCES Anchor))";

constexpr std::string_view kKstarArrayDdl = R"(CREATE TABLE Kstar_array (
  AGId         VARCHAR(50),
  A            BOOL[][],
  Type         VARCHAR(20),
  PRIMARY KEY (AGId, Type),
  FOREIGN KEY (AGId) REFERENCES AG))";

const std::array<TableDef, 7> kFixed{
    TableDef{kAgset, kAgsetColumns, kAgsetDdl},
    TableDef{kAg, kAgColumns, kAgDdl},
    TableDef{kTimeline, kTimelineColumns, kTimelineDdl},
    TableDef{kSignal, kSignalColumns, kSignalDdl},
    TableDef{kAnnotation, kAnnotationColumns, kAnnotationDdl},
    TableDef{kAnchor, kAnchorColumns, kAnchorDdl},
    TableDef{kMetadata, kMetadataColumns, kMetadataDdl},
};

const TableDef kKstarDef{kKstar, kKstarColumns, kKstarDdl};
const TableDef kKstarArrayDef{kKstarArray, kKstarArrayColumns, kKstarArrayDdl};

bool is_plain_identifier(std::string_view name) {
  if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_'))
    return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

tsv::Document empty_doc(std::string_view table) {
  return tsv::Document{fixed_table(table).column_names(), {}};
}

tsv::Cell opt(const std::optional<std::string>& v) { return v; }
std::string or_empty(const tsv::Cell& c) { return c.value_or(std::string{}); }

}  // namespace

std::vector<std::string> TableDef::column_names() const {
  std::vector<std::string> out;
  for (const auto& c : columns) out.emplace_back(c.name);
  return out;
}

std::size_t TableDef::column_index(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == column) return i;
  throw Error(ErrorCode::StorageFailure,
              "table " + std::string(name) + " has no column " + std::string(column));
}

std::span<const TableDef> fixed_tables() { return kFixed; }

const TableDef& fixed_table(std::string_view name) {
  for (const auto& t : kFixed)
    if (t.name == name) return t;
  if (name == kKstar) return kKstarDef;
  if (name == kKstarArray) return kKstarArrayDef;
  throw Error(ErrorCode::StorageFailure, "no fixed table " + std::string(name));
}

bool is_fixed_table(std::string_view name) {
  return std::any_of(kFixed.begin(), kFixed.end(), [&](const TableDef& t) { return t.name == name; });
}

const TableDef& kstar_table() { return kKstarDef; }
const TableDef& kstar_array_table() { return kKstarArrayDef; }

bool is_reserved_table(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return is_fixed_table(upper) || upper == kKstar || upper == kKstarArray ||
         upper == kIndexCatalog || upper == kVersions || upper == kPolicy;
}

std::string sql_identifier(std::string_view name) {
  if (is_plain_identifier(name)) return std::string(name);
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string feature_table_ddl(std::string_view corpus, std::span<const std::string> columns) {
  std::string ddl = "CREATE TABLE " + sql_identifier(corpus) + " (\n";
  ddl += "  ANNOTATIONID VARCHAR(50) NOT NULL,\n";
  for (const auto& col : columns) {
    auto ident = sql_identifier(col);
    ddl += "  " + ident;
    ddl += std::string(ident.size() < 12 ? 12 - ident.size() : 1, ' ');
    ddl += "TEXT,\n";
  }
  ddl += "  PRIMARY KEY (ANNOTATIONID),\n";
  ddl += "  FOREIGN KEY (ANNOTATIONID) REFERENCES ANNOTATION)";
  return ddl;
}

std::string join_signals(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ' ';
    out += id;
  }
  return out;
}

std::vector<std::string> split_signals(std::string_view joined) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < joined.size()) {
    auto sp = joined.find(' ', start);
    if (sp == std::string_view::npos) sp = joined.size();
    if (sp > start) out.emplace_back(joined.substr(start, sp - start));
    start = sp + 1;
  }
  return out;
}

RowSet to_rows(const AGSet& agset) {
  auto names = agset.feature_names();
  return to_rows(agset, names);
}

RowSet to_rows(const AGSet& agset, std::span<const std::string> feature_columns) {
  RowSet rs;
  for (const auto& t : fixed_tables()) rs.tables.emplace(std::string(t.name), empty_doc(t.name));
  auto& agset_rows = rs.tables[std::string(kAgset)].rows;
  agset_rows.push_back({agset.id, agset.version, agset.xmlns, agset.xlink});

  for (const auto& tl : agset.timelines) {
    rs.tables[std::string(kTimeline)].rows.push_back({agset.id, tl.id});
    for (const auto& s : tl.signals)
      rs.tables[std::string(kSignal)].rows.push_back({agset.id, tl.id, s.id, s.mimeclass,
                                                      s.mimetype, s.encoding, s.unit,
                                                      s.xlinktype, s.xlinkhref, s.track});
  }

  rs.features.header.emplace_back(kAnnotationIdColumn);
  for (const auto& c : feature_columns) rs.features.header.push_back(c);

  for (const auto& ag : agset.ags) {
    rs.tables[std::string(kAg)].rows.push_back({ag.id, agset.id, opt(ag.timeline_id), opt(ag.type)});
    for (const auto& a : ag.anchors) {
      tsv::Cell offset;
      if (a.offset) offset = tsv::format_double(*a.offset);
      tsv::Cell signals;
      if (!a.signal_ids.empty()) signals = join_signals(a.signal_ids);
      rs.tables[std::string(kAnchor)].rows.push_back({agset.id, ag.id, a.id, offset, a.unit, signals});
    }
    for (const auto& ann : ag.annotations) {
      rs.tables[std::string(kAnnotation)].rows.push_back(
          {agset.id, ag.id, ann.id, ann.start_anchor, ann.end_anchor, ann.type});
      tsv::Row frow{ann.id};
      for (const auto& c : feature_columns) {
        auto it = ann.features.find(c);
        frow.push_back(it == ann.features.end() ? tsv::Cell{} : tsv::Cell{it->second});
      }
      rs.features.rows.push_back(std::move(frow));
    }
  }

  std::unordered_map<std::string, bool> is_ag;
  for (const auto& ag : agset.ags) is_ag[ag.id] = true;
  for (const auto& md : agset.metadata) {
    tsv::Cell agid;
    if (is_ag.count(md.owner_id)) agid = md.owner_id;
    rs.tables[std::string(kMetadata)].rows.push_back({agset.id, agid, md.owner_id, md.name, md.value});
  }
  return rs;
}

AGSet from_rows(const RowSet& rows) {
  auto table = [&](std::string_view name) -> const tsv::Document& {
    auto it = rows.tables.find(name);
    if (it == rows.tables.end())
      throw Error(ErrorCode::MalformedInput, "missing table " + std::string(name));
    if (it->second.header != fixed_table(name).column_names())
      throw Error(ErrorCode::MalformedInput, "unexpected columns in table " + std::string(name));
    return it->second;
  };
  auto need = [](const tsv::Cell& c, std::string_view what) -> const std::string& {
    if (!c) throw Error(ErrorCode::MalformedInput, "NULL " + std::string(what));
    return *c;
  };

  const auto& agset_doc = table(kAgset);
  if (agset_doc.rows.size() != 1)
    throw Error(ErrorCode::MalformedInput,
                "expected exactly one AGSET row, found " + std::to_string(agset_doc.rows.size()));
  AGSet out;
  const auto& ar = agset_doc.rows.front();
  out.id = need(ar[0], "AGSETID");
  out.version = or_empty(ar[1]);
  out.xmlns = or_empty(ar[2]);
  out.xlink = or_empty(ar[3]);

  for (const auto& r : table(kTimeline).rows)
    out.timelines.push_back(Timeline{need(r[1], "TIMELINEID"), need(r[0], "AGSETID"), {}});
  for (const auto& r : table(kSignal).rows) {
    const auto& tl_id = need(r[1], "TIMELINEID");
    auto tl = std::find_if(out.timelines.begin(), out.timelines.end(),
                           [&](const Timeline& t) { return t.id == tl_id; });
    if (tl == out.timelines.end())
      throw Error(ErrorCode::MalformedInput, "signal references unknown timeline " + tl_id);
    tl->signals.push_back(Signal{need(r[2], "SIGNALID"), tl_id, or_empty(r[3]), or_empty(r[4]),
                                 or_empty(r[5]), or_empty(r[6]), or_empty(r[7]), or_empty(r[8]),
                                 or_empty(r[9])});
  }

  std::unordered_map<std::string, std::size_t> ag_index;
  for (const auto& r : table(kAg).rows) {
    AG ag;
    ag.id = need(r[0], "AGID");
    ag.agset_id = need(r[1], "AGSETID");
    ag.timeline_id = r[2];
    ag.type = r[3];
    ag_index.emplace(ag.id, out.ags.size());
    out.ags.push_back(std::move(ag));
  }
  auto ag_for = [&](const tsv::Cell& c) -> AG& {
    auto it = ag_index.find(need(c, "AGID"));
    if (it == ag_index.end()) throw Error(ErrorCode::MalformedInput, "row references unknown AG " + *c);
    return out.ags[it->second];
  };

  for (const auto& r : table(kAnchor).rows) {
    AG& ag = ag_for(r[1]);
    Anchor a;
    a.id = need(r[2], "ANCHORID");
    a.ag_id = ag.id;
    if (r[3]) {
      a.offset = tsv::parse_double(*r[3]);
      if (!a.offset) throw Error(ErrorCode::MalformedInput, "bad OFFSET '" + *r[3] + "'");
    }
    a.unit = or_empty(r[4]);
    if (r[5]) a.signal_ids = split_signals(*r[5]);
    ag.anchors.push_back(std::move(a));
  }

  std::unordered_map<std::string, Annotation*> by_id;
  for (const auto& r : table(kAnnotation).rows) {
    AG& ag = ag_for(r[1]);
    ag.annotations.push_back(Annotation{need(r[2], "ANNOTATIONID"), ag.id, or_empty(r[3]),
                                        or_empty(r[4]), or_empty(r[5]), {}});
  }
  for (auto& ag : out.ags)
    for (auto& ann : ag.annotations) by_id.emplace(ann.id, &ann);

  const auto& fdoc = rows.features;
  if (!fdoc.header.empty()) {
    if (fdoc.header.front() != kAnnotationIdColumn)
      throw Error(ErrorCode::MalformedInput, "feature table must start with ANNOTATIONID");
    for (const auto& r : fdoc.rows) {
      auto it = by_id.find(need(r[0], "ANNOTATIONID"));
      if (it == by_id.end())
        throw Error(ErrorCode::MalformedInput, "feature row for unknown annotation " + *r[0]);
      for (std::size_t c = 1; c < r.size(); ++c)
        if (r[c]) it->second->features.emplace(fdoc.header[c], *r[c]);
    }
  }

  for (const auto& r : table(kMetadata).rows)
    out.metadata.push_back(MetadataItem{need(r[2], "ID"), need(r[3], "NAME"), or_empty(r[4])});
  return out;
}

void check_lengths(const RowSet& rows) {
  auto check = [](std::string_view table, std::string_view column, std::size_t limit,
                  const tsv::Cell& cell) {
    if (limit != 0 && cell && cell->size() > limit)
      throw Error(ErrorCode::StorageFailure, std::string(table) + "." + std::string(column) +
                                                 " value '" + *cell + "' exceeds length " +
                                                 std::to_string(limit));
  };
  for (const auto& [name, doc] : rows.tables) {
    const auto& def = fixed_table(name);
    for (const auto& row : doc.rows)
      for (std::size_t c = 0; c < def.columns.size(); ++c)
        check(name, def.columns[c].name, def.columns[c].max_length, row[c]);
  }
  for (const auto& row : rows.features.rows) check("feature", kAnnotationIdColumn, 50, row[0]);
}

}  // namespace agdb::schema
