#include "agdb/closure.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>

#include "agdb/error.hpp"
#include "agdb/schema.hpp"

namespace agdb {

bool anchor_order_less(const std::optional<double>& offset_a, std::string_view id_a,
                       const std::optional<double>& offset_b, std::string_view id_b) {
  if (offset_a.has_value() != offset_b.has_value()) return offset_a.has_value();
  if (offset_a && *offset_a != *offset_b) return *offset_a < *offset_b;
  return id_a < id_b;
}

AnchorNumbering anchor_num(const AG& ag) {
  std::vector<const Anchor*> sorted;
  sorted.reserve(ag.anchors.size());
  for (const auto& a : ag.anchors) sorted.push_back(&a);
  std::sort(sorted.begin(), sorted.end(), [](const Anchor* a, const Anchor* b) {
    return anchor_order_less(a->offset, a->id, b->offset, b->id);
  });
  AnchorNumbering out;
  for (const auto* a : sorted) {
    out.number.emplace(a->id, out.order.size() + 1);
    out.order.push_back(a->id);
  }
  return out;
}

std::string closure_tag(std::string_view type, const std::optional<std::string>& domain) {
  std::string tag(type);
  if (domain) tag += "/" + *domain;
  return tag;
}

namespace {

// Closure pairs as indices into ag.anchors.
std::vector<std::pair<std::size_t, std::size_t>> closure_pairs(const AG& ag, std::string_view type,
                                                               const std::string* domain) {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < ag.anchors.size(); ++i) index.emplace(ag.anchors[i].id, i);

  std::vector<std::vector<std::size_t>> next(ag.anchors.size());
  std::vector<bool> incident(ag.anchors.size(), false);
  for (const auto& ann : ag.annotations) {
    if (ann.type != type) continue;
    auto s = index.find(ann.start_anchor);
    auto e = index.find(ann.end_anchor);
    if (s == index.end() || e == index.end())
      throw Error(ErrorCode::UnknownAnchor, "annotation " + ann.id + " in AG " + ag.id);
    next[s->second].push_back(e->second);
    incident[s->second] = incident[e->second] = true;
  }

  struct Span {
    double start, end;
  };
  std::vector<Span> domains;
  if (domain) {
    for (const auto& ann : ag.annotations) {
      if (ann.type != *domain) continue;
      const auto* s = ag.find_anchor(ann.start_anchor);
      const auto* e = ag.find_anchor(ann.end_anchor);
      if (!s || !e) throw Error(ErrorCode::UnknownAnchor, "annotation " + ann.id + " in AG " + ag.id);
      if (!s->offset || !e->offset)
        throw Error(ErrorCode::MissingOffsets, "domain annotation " + ann.id + " in AG " + ag.id);
      domains.push_back({*s->offset, *e->offset});
    }
  }
  auto offset_of = [&](std::size_t i) {
    const auto& a = ag.anchors[i];
    if (!a.offset) throw Error(ErrorCode::MissingOffsets, "anchor " + a.id + " in AG " + ag.id);
    return *a.offset;
  };

  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::vector<std::size_t> stack;
  std::vector<bool> seen(ag.anchors.size());
  for (std::size_t from = 0; from < ag.anchors.size(); ++from) {
    if (!incident[from]) continue;
    std::fill(seen.begin(), seen.end(), false);
    seen[from] = true;
    stack.assign(1, from);
    while (!stack.empty()) {
      auto at = stack.back();
      stack.pop_back();
      for (auto to : next[at])
        if (!seen[to]) {
          seen[to] = true;
          stack.push_back(to);
        }
    }
    for (std::size_t to = 0; to < ag.anchors.size(); ++to) {
      if (!seen[to]) continue;
      if (domain) {
        auto a = offset_of(from), b = offset_of(to);
        bool inside = std::any_of(domains.begin(), domains.end(),
                                  [&](const Span& w) { return w.start <= a && b <= w.end; });
        if (!inside) continue;
      }
      out.emplace_back(from, to);
    }
  }
  return out;
}

KstarIndex to_index(const AG& ag, std::string_view type, const std::optional<std::string>& domain) {
  KstarIndex out;
  out.domain = domain;
  auto tag = closure_tag(type, domain);
  for (auto [a, b] : closure_pairs(ag, type, domain ? &*domain : nullptr))
    out.tuples.emplace(ag.anchors[a].id, ag.anchors[b].id, tag);
  return out;
}

}  // namespace

KstarIndex build_kstar(const AG& ag, std::string_view type) { return to_index(ag, type, std::nullopt); }

KstarIndex build_kstar_domain(const AG& ag, std::string_view type, std::string_view domain_type) {
  return to_index(ag, type, std::string(domain_type));
}

KstarArray build_kstar_array(const AG& ag, std::string_view type,
                             const std::optional<std::string>& domain) {
  auto numbering = anchor_num(ag);
  KstarArray out{ag.id, closure_tag(type, domain), BitMatrix(ag.anchors.size())};
  for (auto [a, b] : closure_pairs(ag, type, domain ? &*domain : nullptr))
    out.matrix.set(numbering.number.at(ag.anchors[a].id) - 1,
                   numbering.number.at(ag.anchors[b].id) - 1);
  return out;
}

std::string_view to_string(IndexKind kind) {
  return kind == IndexKind::kstar ? "kstar" : "kstar-array";
}

IndexKind parse_index_kind(std::string_view name) {
  if (name == "kstar") return IndexKind::kstar;
  if (name == "kstar-array" || name == "array") return IndexKind::kstar_array;
  throw Error(ErrorCode::MalformedInput, "unknown index kind '" + std::string(name) + "'");
}

namespace {

// Minimal AGs (anchors with offsets, typed annotations) rebuilt from the
// ANCHOR and ANNOTATION tables, in row order.
std::vector<AG> ags_from_tables(const TableStore& store) {
  const auto& ag_table = store.table(schema::kAg);
  std::vector<AG> ags;
  std::unordered_map<std::string, std::size_t> by_id;
  auto agid = ag_table.column("AGID");
  for (const auto& r : ag_table.rows) {
    by_id.emplace(*r[agid], ags.size());
    ags.push_back(AG{});
    ags.back().id = *r[agid];
  }
  const auto& anchors = store.table(schema::kAnchor);
  auto an_id = anchors.column("ANCHORID"), an_ag = anchors.column("AGID"),
       an_off = anchors.column("OFFSET");
  for (const auto& r : anchors.rows) {
    auto it = by_id.find(r[an_ag].value_or(""));
    if (it == by_id.end()) throw Error(ErrorCode::StorageFailure, "anchor " + *r[an_id] + " has no AG row");
    Anchor a;
    a.id = *r[an_id];
    a.ag_id = it->first;
    if (r[an_off]) a.offset = tsv::parse_double(*r[an_off]);
    ags[it->second].anchors.push_back(std::move(a));
  }
  const auto& anns = store.table(schema::kAnnotation);
  auto id = anns.column("ANNOTATIONID"), ag = anns.column("AGID"), start = anns.column("STARTANCHOR"),
       end = anns.column("ENDANCHOR"), type = anns.column("TYPE");
  for (const auto& r : anns.rows) {
    auto it = by_id.find(r[ag].value_or(""));
    if (it == by_id.end()) throw Error(ErrorCode::StorageFailure, "annotation " + *r[id] + " has no AG row");
    Annotation a;
    a.id = *r[id];
    a.ag_id = it->first;
    a.start_anchor = r[start].value_or("");
    a.end_anchor = r[end].value_or("");
    a.type = r[type].value_or("");
    ags[it->second].annotations.push_back(std::move(a));
  }
  return ags;
}

}  // namespace

IndexStats build_index(TableStore& store, IndexKind kind, std::string_view type,
                       const std::optional<std::string>& domain) {
  std::unique_lock lock(store.mutex());
  auto tag = closure_tag(type, domain);
  if (tag.size() > 20) throw Error(ErrorCode::StorageFailure, "index type tag '" + tag + "' exceeds 20 characters");
  auto ags = ags_from_tables(store);

  IndexStats stats{kind, tag, ags.size()};
  std::vector<tsv::Row> rows;
  for (const auto& ag : ags) {
    if (kind == IndexKind::kstar) {
      for (auto [a, b] : closure_pairs(ag, type, domain ? &*domain : nullptr))
        rows.push_back({ag.anchors[a].id, ag.anchors[b].id, tag});
    } else {
      auto arr = build_kstar_array(ag, type, domain);
      rows.push_back({arr.ag_id, arr.tag, arr.matrix.to_hex()});
    }
  }
  if (kind == IndexKind::kstar)
    stats.tuples = rows.size();
  else
    stats.matrices = rows.size();

  auto& table = store.mutable_table(kind == IndexKind::kstar ? schema::kKstar : schema::kKstarArray);
  auto tag_col = table.column("TYPE");
  std::erase_if(table.rows, [&](const tsv::Row& r) { return r[tag_col] == tag; });
  std::move(rows.begin(), rows.end(), std::back_inserter(table.rows));

  auto& catalog = store.mutable_table(schema::kIndexCatalog);
  std::string kind_name(to_string(kind));
  std::erase_if(catalog.rows, [&](const tsv::Row& r) { return r[0] == kind_name && r[1] == tag; });
  catalog.rows.push_back({kind_name, tag});
  store.flush();
  return stats;
}

bool has_index(const TableStore& store, IndexKind kind, std::string_view tag) {
  std::shared_lock lock(store.mutex());
  std::string kind_name(to_string(kind));
  const auto& catalog = store.table(schema::kIndexCatalog);
  return std::any_of(catalog.rows.begin(), catalog.rows.end(),
                     [&](const tsv::Row& r) { return r[0] == kind_name && r[1] == tag; });
}

}  // namespace agdb
