#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "agdb/engine.hpp"
#include "agdb/error.hpp"

namespace agdb {

using namespace agql;

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

struct Graph {
  const AG* ag;
  std::map<std::string, std::vector<const Annotation*>> out_arcs;  // by start anchor, all types
};

class Matcher {
 public:
  Matcher(const QueryAst& ast, const AGSet& agset, const std::optional<std::string>& domain)
      : ast_(ast), agset_(agset), domain_(domain) {
    for (const auto& ag : agset.ags) {
      Graph g{&ag, {}};
      for (const auto& ann : ag.annotations) g.out_arcs[ann.start_anchor].push_back(&ann);
      graphs_.push_back(std::move(g));
    }
    names_ = agset.feature_names();
  }

  ResultSet run() {
    ResultSet out;
    out.columns = ast_.select_vars;
    clause(0);
    out.rows.assign(results_.begin(), results_.end());
    return out;
  }

 private:
  using Bindings = std::map<std::string, std::string>;

  // Feature name a constraint field refers to: exact, else a unique
  // case-insensitive match.
  std::optional<std::string> resolve(const std::string& field) const {
    if (std::find(names_.begin(), names_.end(), field) != names_.end()) return field;
    std::optional<std::string> found;
    for (const auto& n : names_)
      if (upper(n) == upper(field)) {
        if (found) return std::nullopt;
        found = n;
      }
    return found;
  }

  bool arc_matches(const Arc& arc, const Annotation& ann) const {
    for (const auto& con : arc.constraints) {
      std::string field, value;
      if (const auto* f = std::get_if<FeatureEq>(&con)) {
        field = f->field;
        value = f->value;
      } else if (const auto* l = std::get_if<LabelEq>(&con)) {
        field = std::string(kLabelFeature);
        value = l->value;
      } else {
        continue;
      }
      auto name = resolve(field);
      if (!name) return false;
      auto it = ann.features.find(*name);
      if (it == ann.features.end() || it->second != value) return false;
    }
    return true;
  }

  bool incident(const Graph& g, const std::string& anchor, const std::string& type) const {
    return std::any_of(g.ag->annotations.begin(), g.ag->annotations.end(), [&](const Annotation& a) {
      return a.type == type && (a.start_anchor == anchor || a.end_anchor == anchor);
    });
  }

  bool in_domain(const Graph& g, const std::string& from, const std::string& to) const {
    if (!domain_) return true;
    const auto* a = g.ag->find_anchor(from);
    const auto* b = g.ag->find_anchor(to);
    if (!a || !b || !a->offset || !b->offset) throw Error(ErrorCode::MissingOffsets, "anchor without offset");
    for (const auto& w : g.ag->annotations) {
      if (w.type != *domain_) continue;
      const auto* s = g.ag->find_anchor(w.start_anchor);
      const auto* e = g.ag->find_anchor(w.end_anchor);
      if (!s || !e || !s->offset || !e->offset) throw Error(ErrorCode::MissingOffsets, "domain without offset");
      if (*s->offset <= *a->offset && *b->offset <= *e->offset) return true;
    }
    return false;
  }

  // Every anchor reachable from `from` by a path of type-`type` arcs,
  // enumerating the paths one by one.
  void paths(const Graph& g, const std::string& at, const std::string& type, std::set<std::string>& ends) const {
    ends.insert(at);
    auto it = g.out_arcs.find(at);
    if (it == g.out_arcs.end()) return;
    for (const auto* a : it->second)
      if (a->type == type) paths(g, a->end_anchor, type, ends);
  }

  void clause(std::size_t c) {
    if (c == ast_.clauses.size()) {
      std::vector<std::string> row;
      for (const auto& v : ast_.select_vars) row.push_back(bindings_.at(v));
      results_.insert(std::move(row));
      return;
    }
    const auto& cl = ast_.clauses[c];
    if (cl.database != kDefaultDatabase && cl.database != agset_.id) return;
    const auto& first = std::get<Variable>(cl.path.front()).name;
    for (const auto& g : graphs_) {
      if (auto it = bindings_.find(first); it != bindings_.end()) {
        if (g.ag->find_anchor(it->second)) walk(g, c, 1, it->second);
        continue;
      }
      for (const auto& anchor : g.ag->anchors) {
        bindings_[first] = anchor.id;
        walk(g, c, 1, anchor.id);
        bindings_.erase(first);
      }
    }
  }

  // Matches path element `i` onward, standing at anchor `at`.
  void walk(const Graph& g, std::size_t c, std::size_t i, const std::string& at) {
    const auto& cl = ast_.clauses[c];
    if (i == cl.path.size()) {
      clause(c + 1);
      return;
    }
    if (const auto* v = std::get_if<Variable>(&cl.path[i])) {
      auto it = bindings_.find(v->name);
      if (it == bindings_.end()) {
        bindings_[v->name] = at;
        walk(g, c, i + 1, at);
        bindings_.erase(v->name);
      } else if (it->second == at) {
        walk(g, c, i + 1, at);
      }
      return;
    }
    const auto& arc = std::get<Arc>(cl.path[i]);
    if (arc.starred) {
      std::set<std::string> ends;
      if (auto it = g.out_arcs.find(at); it != g.out_arcs.end())
        for (const auto* a : it->second)
          if (a->type == cl.type) paths(g, a->end_anchor, cl.type, ends);
      if (incident(g, at, cl.type)) ends.insert(at);
      for (const auto& end : ends)
        if (in_domain(g, at, end)) walk(g, c, i + 1, end);
      return;
    }
    auto it = g.out_arcs.find(at);
    if (it == g.out_arcs.end()) return;
    for (const auto* a : it->second) {
      if (a->type != cl.type || !arc_matches(arc, *a)) continue;
      std::vector<std::string> fresh;
      bool ok = true;
      for (const auto& con : arc.constraints) {
        const auto* id = std::get_if<IdBind>(&con);
        if (!id) continue;
        auto b = bindings_.find(id->var);
        if (b == bindings_.end()) {
          bindings_[id->var] = a->id;
          fresh.push_back(id->var);
        } else if (b->second != a->id) {
          ok = false;
        }
      }
      if (ok) walk(g, c, i + 1, a->end_anchor);
      for (const auto& v : fresh) bindings_.erase(v);
    }
  }

  const QueryAst& ast_;
  const AGSet& agset_;
  const std::optional<std::string>& domain_;
  std::vector<Graph> graphs_;
  std::vector<std::string> names_;
  Bindings bindings_;
  std::set<std::vector<std::string>> results_;
};

}  // namespace

ResultSet oracle_match(const QueryAst& ast, const AGSet& agset, const std::optional<std::string>& domain) {
  return Matcher(ast, agset, domain).run();
}

}  // namespace agdb
