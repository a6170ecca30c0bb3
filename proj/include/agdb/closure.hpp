#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "agdb/bit_matrix.hpp"
#include "agdb/model.hpp"
#include "agdb/table_store.hpp"

namespace agdb {

/// Per-AG bijection between anchor ids and 1..n.
struct AnchorNumbering {
  std::vector<std::string> order;  // order[k] has number k + 1
  std::unordered_map<std::string, std::size_t> number;

  std::size_t size() const { return order.size(); }
  bool operator==(const AnchorNumbering&) const = default;
};

/// Ordering used for numbering: offset ascending, anchors without offset
/// last, ties broken by id.
bool anchor_order_less(const std::optional<double>& offset_a, std::string_view id_a,
                       const std::optional<double>& offset_b, std::string_view id_b);

AnchorNumbering anchor_num(const AG& ag);

/// "phn" or, with a domain, "phn/wrd".
std::string closure_tag(std::string_view type, const std::optional<std::string>& domain);

using KstarTuple = std::tuple<std::string, std::string, std::string>;

struct KstarIndex {
  std::set<KstarTuple> tuples;  // (start anchor, end anchor, tag)
  std::optional<std::string> domain;

  bool operator==(const KstarIndex&) const = default;
};

/// Reflexive-transitive closure of the type-`type` arcs of `ag`. Reflexive
/// pairs are present only for anchors incident to such an arc.
KstarIndex build_kstar(const AG& ag, std::string_view type);

/// Keeps a pair (A, B) only if one `domain_type` annotation w of the AG has
/// offset(start(w)) <= offset(A) and offset(B) <= offset(end(w)).
/// Throws MissingOffsets if a needed anchor has no offset.
KstarIndex build_kstar_domain(const AG& ag, std::string_view type, std::string_view domain_type);

struct KstarArray {
  std::string ag_id;
  std::string tag;
  BitMatrix matrix;  // indexed by anchor number - 1

  bool operator==(const KstarArray&) const = default;
};

struct KstarArrayIndex {
  std::vector<KstarArray> matrices;
  std::map<std::string, AnchorNumbering> numbering;  // by AG id

  bool operator==(const KstarArrayIndex&) const = default;
};

KstarArray build_kstar_array(const AG& ag, std::string_view type,
                             const std::optional<std::string>& domain);

enum class IndexKind { kstar, kstar_array };

std::string_view to_string(IndexKind kind);
IndexKind parse_index_kind(std::string_view name);

struct IndexStats {
  IndexKind kind;
  std::string tag;
  std::size_t ags = 0;
  std::size_t tuples = 0;    // kstar: tuples written
  std::size_t matrices = 0;  // kstar-array: matrices written
};

/// Builds the index over every AG of every AGSet in the store, replacing any
/// earlier index with the same kind and tag, and records it in the catalog.
IndexStats build_index(TableStore& store, IndexKind kind, std::string_view type,
                       const std::optional<std::string>& domain);

bool has_index(const TableStore& store, IndexKind kind, std::string_view tag);

}  // namespace agdb
