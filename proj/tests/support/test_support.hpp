#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "agdb/agql.hpp"
#include "agdb/engine.hpp"
#include "agdb/error.hpp"
#include "agdb/model.hpp"
#include "agdb/plan.hpp"
#include "agdb/table_store.hpp"

namespace agdb::testing {

using Rng = std::mt19937_64;

/// Code of the agdb::Error thrown by `f`, or nullopt if it returns normally.
std::optional<ErrorCode> code_of(const std::function<void()>& f);

std::size_t pick(Rng& rng, std::size_t n);
bool coin(Rng& rng, double p = 0.5);

/// AGSet exercising every column of the fixed tables: metadata on all owner
/// kinds, signals, anchors with and without offsets, odd feature names and
/// values with tabs, newlines and quotes. Ids are prefixed by `id` so several
/// sets can share a store.
AGSet random_agset(Rng& rng, const std::string& id);

/// Small corpus for query checks: AGs of at most 12 anchors, all with
/// offsets, arcs of types "a" and "b" plus wide "d" arcs usable as a domain.
/// Features: label in {x, y, z}, optional pos in {n, v}.
AGSet random_query_corpus(Rng& rng, const std::string& id);

/// Random AGQL query over random_query_corpus types with at most
/// `max_starred` starred arcs.
agql::QueryAst random_query(Rng& rng, std::size_t max_starred = 3);

/// Pairs (A, B) with a non-empty path of type-`type` arcs from A to B, plus
/// (A, A) for anchors incident to such an arc. Floyd-Warshall over the AG.
std::set<std::pair<std::string, std::string>> floyd_warshall_closure(const AG& ag, const std::string& type);

/// Keeps the pairs whose span lies inside a single `domain` annotation.
std::set<std::pair<std::string, std::string>> restrict_to_domain(
    const AG& ag, const std::set<std::pair<std::string, std::string>>& pairs, const std::string& domain);

/// Query answers computed clause by clause as relations of bindings, star
/// reachability from floyd_warshall_closure, then a natural join of the
/// clause relations.
ResultSet relational_match(const agql::QueryAst& ast, const AGSet& agset,
                           const std::optional<std::string>& domain = std::nullopt);

/// In-memory store holding `agset` with K* and K*-array indexes for each
/// type in `types`, unrestricted and restricted to `domain` if given.
TableStore indexed_store(const AGSet& agset, const std::vector<std::string>& types,
                         const std::optional<std::string>& domain = std::nullopt);

/// Compiles and runs `ast` on `store`.
ResultSet run_engine(const agql::QueryAst& ast, const TableStore& store, QueryMode mode,
                     const std::optional<std::string>& domain = std::nullopt);

/// First column of every row.
std::set<std::string> first_column(const ResultSet& rs);

/// Lowercases outside quoted literals, collapses whitespace, sorts FROM
/// items, splits WHERE on AND and sorts the conjuncts, and orders the sides
/// of each equality.
std::string normalize_sql(const std::string& sql);

/// Collapses runs of whitespace and drops whitespace next to punctuation.
std::string normalize_ddl(const std::string& ddl);

std::string read_text(const std::string& path);

}  // namespace agdb::testing
