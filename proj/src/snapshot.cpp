#include <algorithm>
#include <mutex>

#include "agdb/closure.hpp"
#include "agdb/engine.hpp"
#include "agdb/error.hpp"
#include "agdb/schema.hpp"
#include "agdb/tsv.hpp"

namespace agdb {

namespace {

const std::string& require(const tsv::Cell& cell, std::string_view what) {
  if (!cell) throw Error(ErrorCode::StorageFailure, "NULL " + std::string(what));
  return *cell;
}

}  // namespace

Snapshot::Snapshot(const TableStore& store) {
  std::shared_lock lock(store.mutex());

  const auto& anns = store.table(schema::kAnnotation);
  auto a_id = anns.column("ANNOTATIONID"), a_set = anns.column("AGSETID"), a_ag = anns.column("AGID"),
       a_start = anns.column("STARTANCHOR"), a_end = anns.column("ENDANCHOR"), a_type = anns.column("TYPE");
  annotations_.reserve(anns.rows.size());
  for (const auto& r : anns.rows) {
    AnnotationRow row{intern(require(r[a_id], "annotation id")), intern(require(r[a_set], "AGSETID")),
                      intern(require(r[a_ag], "AGID")),          intern(r[a_start].value_or("")),
                      intern(r[a_end].value_or("")),             intern(r[a_type].value_or(""))};
    by_type_[row.type].push_back(static_cast<std::uint32_t>(annotations_.size()));
    annotations_.push_back(row);
  }

  // Anchor numbering per AG, with the same order the index builder uses.
  const auto& anchors = store.table(schema::kAnchor);
  auto n_id = anchors.column("ANCHORID"), n_ag = anchors.column("AGID"), n_off = anchors.column("OFFSET");
  struct Pending {
    std::optional<double> offset;
    const std::string* id;
    Id ag;
  };
  std::vector<Pending> pending;
  pending.reserve(anchors.rows.size());
  for (const auto& r : anchors.rows) {
    std::optional<double> off;
    if (r[n_off]) off = tsv::parse_double(*r[n_off]);
    pending.push_back({off, &require(r[n_id], "anchor id"), intern(require(r[n_ag], "AGID"))});
  }
  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    if (a.ag != b.ag) return a.ag < b.ag;
    return anchor_order_less(a.offset, *a.id, b.offset, *b.id);
  });
  std::uint32_t number = 0;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    if (i == 0 || pending[i].ag != pending[i - 1].ag) number = 0;
    auto id = intern(*pending[i].id);
    anchor_index_.emplace(id, static_cast<std::uint32_t>(anchors_.size()));
    anchors_.push_back({id, pending[i].ag, number++});
  }

  for (const auto& corpus : store.corpora()) {
    const auto& t = store.feature_table(corpus);
    FeatureTable ft;
    ft.columns.assign(t.columns.begin() + 1, t.columns.end());
    for (const auto& r : t.rows) {
      std::vector<Id> values;
      values.reserve(ft.columns.size());
      for (std::size_t c = 1; c < r.size(); ++c) values.push_back(r[c] ? intern(*r[c]) : kNull);
      ft.rows.emplace(intern(require(r[0], "ANNOTATIONID")), std::move(values));
    }
    features_.emplace(corpus, std::move(ft));
  }

  for (const auto& r : store.table(schema::kKstar).rows)
    kstar_[intern(require(r[2], "closure type"))].emplace_back(intern(require(r[0], "anchor")),
                                                              intern(require(r[1], "anchor")));
  for (const auto& r : store.table(schema::kKstarArray).rows)
    arrays_[intern(require(r[1], "closure type"))].emplace(intern(require(r[0], "AGID")),
                                                          BitMatrix::from_hex(require(r[2], "matrix")));

  lock.unlock();
  catalog_ = catalog_of(store);
}

Snapshot::Id Snapshot::intern(std::string_view text) {
  auto it = ids_.find(std::string(text));
  if (it != ids_.end()) return it->second;
  auto id = static_cast<Id>(strings_.size());
  strings_.emplace_back(text);
  ids_.emplace(strings_.back(), id);
  return id;
}

std::optional<Snapshot::Id> Snapshot::lookup(std::string_view text) const {
  auto it = ids_.find(std::string(text));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::uint32_t>& Snapshot::annotations_of_type(Id type) const {
  static const std::vector<std::uint32_t> kEmpty;
  auto it = by_type_.find(type);
  return it == by_type_.end() ? kEmpty : it->second;
}

const Snapshot::FeatureTable* Snapshot::feature_table(std::string_view corpus) const {
  auto it = features_.find(corpus);
  return it == features_.end() ? nullptr : &it->second;
}

const std::vector<std::pair<Snapshot::Id, Snapshot::Id>>& Snapshot::kstar(Id tag) const {
  static const std::vector<std::pair<Id, Id>> kEmpty;
  auto it = kstar_.find(tag);
  return it == kstar_.end() ? kEmpty : it->second;
}

const std::unordered_map<Snapshot::Id, BitMatrix>& Snapshot::matrices(Id tag) const {
  static const std::unordered_map<Id, BitMatrix> kEmpty;
  auto it = arrays_.find(tag);
  return it == arrays_.end() ? kEmpty : it->second;
}

const BitMatrix* Snapshot::matrix(Id tag, Id ag) const {
  const auto& m = matrices(tag);
  auto it = m.find(ag);
  return it == m.end() ? nullptr : &it->second;
}

const Snapshot::AnchorRow* Snapshot::anchor(Id id) const {
  auto it = anchor_index_.find(id);
  return it == anchor_index_.end() ? nullptr : &anchors_[it->second];
}

}  // namespace agdb
