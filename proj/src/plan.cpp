#include "agdb/plan.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <numeric>

#include "agdb/error.hpp"
#include "agdb/schema.hpp"

namespace agdb {

using namespace agql;

std::string_view to_string(QueryMode mode) {
  return mode == QueryMode::kstar ? "kstar" : "kstar-array";
}

QueryMode parse_query_mode(std::string_view name) {
  if (name == "kstar") return QueryMode::kstar;
  if (name == "array" || name == "kstar-array") return QueryMode::kstar_array;
  throw Error(ErrorCode::MalformedInput, "unknown query mode '" + std::string(name) + "'");
}

std::string_view to_string(SourceRole role) {
  switch (role) {
    case SourceRole::word_arc: return "word-arc";
    case SourceRole::constrained_arc: return "constrained-arc";
    case SourceRole::kstar_ref: return "kstar-ref";
    case SourceRole::kstar_array_ref: return "kstar-array-ref";
    case SourceRole::anchor_ref: return "anchor-ref";
  }
  return "?";
}

std::string_view column_name(Col column) {
  switch (column) {
    case Col::annotation_id: return "AnnotationId";
    case Col::start_anchor: return "StartAnchor";
    case Col::end_anchor: return "EndAnchor";
    case Col::ag_id: return "AGId";
    case Col::matrix: return "A";
    case Col::anchor_id: return "AnchorId";
  }
  return "?";
}

std::string_view to_string(PredicateKind kind) {
  switch (kind) {
    case PredicateKind::anchor_eq: return "anchor_eq";
    case PredicateKind::id_eq: return "id_eq";
    case PredicateKind::ag_eq: return "ag_eq";
    case PredicateKind::cell: return "cell";
  }
  return "?";
}

Catalog catalog_of(const TableStore& store) {
  std::shared_lock lock(store.mutex());
  Catalog out;
  for (const auto& corpus : store.corpora()) {
    const auto& cols = store.feature_table(corpus).columns;
    out.feature_columns[corpus] = std::vector<std::string>(cols.begin() + 1, cols.end());
  }
  for (const auto& r : store.table(schema::kIndexCatalog).rows)
    if (r[0] && r[1]) out.indexes.emplace(parse_index_kind(*r[0]), *r[1]);
  return out;
}

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

struct Step {
  const Arc* arc;
  std::string from;
  std::string to;
  std::optional<std::size_t> source;  // sourced arcs only
};

class Compiler {
 public:
  Compiler(const QueryAst& ast, const CompileOptions& options, const Catalog* catalog)
      : ast_(ast), options_(options), catalog_(catalog) {
    plan_.mode = options.mode;
    plan_.domain = options.domain;
    default_corpus_ = options.default_corpus;
    if (!default_corpus_ && catalog_ && catalog_->feature_columns.size() == 1)
      default_corpus_ = catalog_->feature_columns.begin()->first;
  }

  Plan run() {
    if (ast_.clauses.empty()) throw Error(ErrorCode::ParseError, "query has no clauses");
    split_steps();
    create_sources();
    bind_occurrences();
    if (plan_.mode == QueryMode::kstar_array) add_array_predicates();
    project();
    choose_columns();
    order_joins();
    return std::move(plan_);
  }

 private:
  bool array_mode() const { return plan_.mode == QueryMode::kstar_array; }

  void split_steps() {
    steps_.resize(ast_.clauses.size());
    for (std::size_t c = 0; c < ast_.clauses.size(); ++c) {
      const auto& path = ast_.clauses[c].path;
      std::string from = std::get<Variable>(path.front()).name;
      std::size_t implicit = 0;
      for (std::size_t i = 1; i < path.size(); ++i) {
        const auto* arc = std::get_if<Arc>(&path[i]);
        if (!arc) continue;
        std::string to;
        if (i + 1 < path.size() && std::holds_alternative<Variable>(path[i + 1]))
          to = std::get<Variable>(path[i + 1]).name;
        else
          to = "_c" + std::to_string(c + 1) + "_" + std::to_string(++implicit);
        steps_[c].push_back(Step{arc, from, to, std::nullopt});
        from = to;
      }
    }
  }

  bool sourced(const Step& s) const { return !s.arc->starred || !array_mode(); }

  std::string next_alias(std::string_view prefix, std::size_t& counter, bool bare_first) {
    ++counter;
    if (bare_first && counter == 1) return std::string(prefix);
    return std::string(prefix) + std::to_string(counter);
  }

  std::string resolve_feature(const std::string& corpus, const std::string& field) const {
    if (!catalog_) return field;
    auto it = catalog_->feature_columns.find(corpus);
    if (it == catalog_->feature_columns.end()) throw Error(ErrorCode::UnknownCorpus, corpus);
    const auto& cols = it->second;
    if (std::find(cols.begin(), cols.end(), field) != cols.end()) return field;
    std::vector<std::string> folded;
    for (const auto& c : cols)
      if (upper(c) == upper(field)) folded.push_back(c);
    if (folded.size() == 1) return folded.front();
    throw Error(ErrorCode::UnknownFeature, corpus + "." + field);
  }

  void check_corpus(const std::string& name) const {
    if (catalog_ && !catalog_->feature_columns.count(name)) throw Error(ErrorCode::UnknownCorpus, name);
  }

  void create_sources() {
    // Terms that only matrix cells touch need an ANCHOR row source.
    std::set<std::string> bound;
    for (const auto& clause : steps_)
      for (const auto& s : clause)
        if (sourced(s)) bound.insert({s.from, s.to});
    std::set<std::string> placed;

    for (std::size_t c = 0; c < ast_.clauses.size(); ++c) {
      const auto& clause = ast_.clauses[c];
      const bool named_db = clause.database != kDefaultDatabase;
      if (named_db) check_corpus(clause.database);

      for (auto& step : steps_[c]) {
        if (step.arc->starred) continue;
        Source src;
        src.clause = c;
        src.type = clause.type;
        for (const auto& con : step.arc->constraints) {
          if (const auto* f = std::get_if<FeatureEq>(&con)) src.filters.push_back({f->field, f->value});
          if (const auto* l = std::get_if<LabelEq>(&con))
            src.filters.push_back({std::string(kLabelFeature), l->value});
        }
        if (src.filters.empty()) {
          src.role = SourceRole::word_arc;
          src.alias = next_alias("W", words_, true);
          if (named_db) src.agset = clause.database;
        } else {
          src.role = SourceRole::constrained_arc;
          src.alias = next_alias("P", constrained_, false);
          if (named_db) {
            src.corpus = clause.database;
          } else if (default_corpus_) {
            src.corpus = *default_corpus_;
          } else if (catalog_) {
            throw Error(ErrorCode::UnknownCorpus, "db names no default corpus: the store holds " +
                                                      std::to_string(catalog_->feature_columns.size()) +
                                                      " corpora");
          } else {
            src.corpus = std::string(kDefaultDatabase);
          }
          for (auto& f : src.filters) f.column = resolve_feature(src.corpus, f.column);
        }
        step.source = plan_.sources.size();
        plan_.sources.push_back(std::move(src));
      }

      bool has_star = false;
      for (const auto& step : steps_[c]) has_star |= step.arc->starred;
      if (!has_star) continue;

      if (array_mode()) {
        for (const auto& step : steps_[c]) {
          for (const auto* term : {&step.from, &step.to}) {
            if (bound.count(*term) || placed.count(*term)) continue;
            placed.insert(*term);
            Source src;
            src.role = SourceRole::anchor_ref;
            src.clause = c;
            src.alias = next_alias("N", anchors_, false);
            anchor_sources_.emplace(*term, plan_.sources.size());
            plan_.sources.push_back(std::move(src));
          }
        }
      }

      auto tag = closure_tag(clause.type, options_.domain);
      auto kind = array_mode() ? IndexKind::kstar_array : IndexKind::kstar;
      if (catalog_ && !catalog_->indexes.count({kind, tag}))
        throw Error(ErrorCode::MissingIndex, std::string(to_string(kind)) + " index for type " + tag);

      if (array_mode()) {
        Source src;
        src.role = SourceRole::kstar_array_ref;
        src.clause = c;
        src.type = tag;
        src.alias = next_alias("K", arrays_, true);
        matrix_of_clause_.emplace(c, plan_.sources.size());
        plan_.sources.push_back(std::move(src));
      } else {
        for (auto& step : steps_[c]) {
          if (!step.arc->starred) continue;
          Source src;
          src.role = SourceRole::kstar_ref;
          src.clause = c;
          src.type = tag;
          src.alias = next_alias("K", kstars_, false);
          step.source = plan_.sources.size();
          plan_.sources.push_back(std::move(src));
        }
      }
    }
  }

  void occur(std::map<std::string, ColumnRef>& canon, const std::string& name, ColumnRef ref,
             PredicateKind kind) {
    auto [it, fresh] = canon.emplace(name, ref);
    if (!fresh) plan_.predicates.push_back({kind, it->second, ref});
  }

  void bind_occurrences() {
    for (const auto& [term, src] : anchor_sources_) anchors_canon_.emplace(term, ColumnRef{src, Col::anchor_id});
    for (const auto& clause : steps_) {
      for (const auto& step : clause) {
        if (!step.source) continue;
        occur(anchors_canon_, step.from, {*step.source, Col::start_anchor}, PredicateKind::anchor_eq);
        occur(anchors_canon_, step.to, {*step.source, Col::end_anchor}, PredicateKind::anchor_eq);
        for (const auto& con : step.arc->constraints)
          if (const auto* id = std::get_if<IdBind>(&con))
            occur(ids_canon_, id->var, {*step.source, Col::annotation_id}, PredicateKind::id_eq);
      }
    }
  }

  std::size_t find(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }

  void add_array_predicates() {
    std::vector<std::size_t> parent(plan_.sources.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (const auto& p : plan_.predicates)
      parent[find(parent, p.lhs.source)] = find(parent, p.rhs.source);

    for (std::size_t c = 0; c < steps_.size(); ++c) {
      auto m = matrix_of_clause_.find(c);
      if (m == matrix_of_clause_.end()) continue;
      const auto k = m->second;

      std::set<std::size_t> candidates;
      for (std::size_t s = 0; s < plan_.sources.size(); ++s)
        if (s != k && plan_.sources[s].clause == c) candidates.insert(s);
      for (const auto& step : steps_[c]) {
        candidates.insert(anchors_canon_.at(step.from).source);
        candidates.insert(anchors_canon_.at(step.to).source);
      }
      const auto root = *candidates.begin();  // first in plan order

      plan_.predicates.push_back({PredicateKind::ag_eq, {k, Col::ag_id}, {root, Col::ag_id}});
      parent[find(parent, k)] = find(parent, root);
      for (auto s : candidates) {
        if (find(parent, s) == find(parent, root)) continue;
        plan_.predicates.push_back({PredicateKind::ag_eq, {s, Col::ag_id}, {root, Col::ag_id}});
        parent[find(parent, s)] = find(parent, root);
      }
      for (const auto& step : steps_[c])
        if (step.arc->starred)
          plan_.predicates.push_back(
              {PredicateKind::cell, anchors_canon_.at(step.from), anchors_canon_.at(step.to), k});
    }
  }

  void project() {
    for (const auto& var : ast_.select_vars) {
      if (auto it = anchors_canon_.find(var); it != anchors_canon_.end())
        plan_.projection.push_back({var, it->second});
      else if (auto id = ids_canon_.find(var); id != ids_canon_.end())
        plan_.projection.push_back({var, id->second});
      else
        throw Error(ErrorCode::UnboundSelectVariable, var);
    }
  }

  void choose_columns() {
    std::vector<std::set<Col>> used(plan_.sources.size());
    for (const auto& p : plan_.predicates) {
      used[p.lhs.source].insert(p.lhs.column);
      used[p.rhs.source].insert(p.rhs.column);
      if (p.kind == PredicateKind::cell) used[p.matrix].insert(Col::matrix);
    }
    for (const auto& o : plan_.projection) used[o.column.source].insert(o.column.column);
    for (std::size_t s = 0; s < plan_.sources.size(); ++s) {
      auto& src = plan_.sources[s];
      if (used[s].empty()) {
        switch (src.role) {
          case SourceRole::word_arc:
          case SourceRole::constrained_arc: used[s].insert(Col::annotation_id); break;
          case SourceRole::kstar_ref: used[s].insert(Col::start_anchor); break;
          case SourceRole::kstar_array_ref: used[s].insert(Col::ag_id); break;
          case SourceRole::anchor_ref: used[s].insert(Col::anchor_id); break;
        }
      }
      src.columns.assign(used[s].begin(), used[s].end());
    }
  }

  // Greedy: the first remaining source (in plan order) that shares an
  // equality with a joined one; otherwise the first remaining source.
  void order_joins() {
    const auto n = plan_.sources.size();
    std::vector<bool> joined(n, false);
    for (std::size_t step = 0; step < n; ++step) {
      std::optional<std::size_t> pick;
      for (std::size_t s = 0; s < n && !pick; ++s) {
        if (joined[s]) continue;
        for (const auto& p : plan_.predicates) {
          if (p.kind == PredicateKind::cell) continue;
          if ((p.lhs.source == s && joined[p.rhs.source]) || (p.rhs.source == s && joined[p.lhs.source])) {
            pick = s;
            break;
          }
        }
      }
      if (!pick)
        for (std::size_t s = 0; s < n; ++s)
          if (!joined[s]) {
            pick = s;
            break;
          }
      joined[*pick] = true;
      plan_.join_order.push_back(*pick);
    }
  }

  const QueryAst& ast_;
  const CompileOptions& options_;
  const Catalog* catalog_;
  std::optional<std::string> default_corpus_;
  Plan plan_;
  std::vector<std::vector<Step>> steps_;
  std::map<std::string, std::size_t> anchor_sources_;
  std::map<std::size_t, std::size_t> matrix_of_clause_;
  std::map<std::string, ColumnRef> anchors_canon_;
  std::map<std::string, ColumnRef> ids_canon_;
  std::size_t words_ = 0, constrained_ = 0, kstars_ = 0, arrays_ = 0, anchors_ = 0;
};

}  // namespace

Plan compile(const QueryAst& ast, const CompileOptions& options, const Catalog* catalog) {
  return Compiler(ast, options, catalog).run();
}

}  // namespace agdb
