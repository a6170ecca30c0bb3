#include "test_support.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "agdb/closure.hpp"
#include "agdb/relstore.hpp"

namespace agdb::testing {

std::optional<ErrorCode> code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

namespace {

template <class T>
const T& choose(Rng& rng, const std::vector<T>& items) {
  return items[pick(rng, items.size())];
}

std::string random_text(Rng& rng) {
  static const std::vector<std::string> pieces = {"a", "Z", "0", " ", "\t", "\n", "\\", "'", "\"", "é", "∗", ";", ",", "<", "&"};
  std::string out;
  auto n = pick(rng, 6);
  for (std::size_t i = 0; i < n; ++i) out += choose(rng, pieces);
  return out;
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

AGSet random_agset(Rng& rng, const std::string& id) {
  AGSet set;
  set.id = id;
  set.version = coin(rng) ? "1.0" : "";
  set.xmlns = coin(rng) ? "http://www.ldc.upenn.edu/atlas" : "";
  set.xlink = coin(rng) ? "http://www.w3.org/1999/xlink" : "";

  std::vector<std::string> owners{id};
  std::vector<std::string> signal_ids;
  std::vector<std::string> timeline_ids;
  auto timelines = pick(rng, 3);
  for (std::size_t t = 0; t < timelines; ++t) {
    Timeline tl{id + ".tl" + std::to_string(t), id, {}};
    auto signals = pick(rng, 3);
    for (std::size_t s = 0; s < signals; ++s) {
      Signal sig;
      sig.id = tl.id + ".s" + std::to_string(s);
      sig.timeline_id = tl.id;
      sig.mimeclass = coin(rng) ? "audio" : "";
      sig.mimetype = coin(rng) ? "wav" : "";
      sig.encoding = coin(rng) ? "pcm" : "";
      sig.unit = coin(rng) ? "sec" : "";
      sig.xlinktype = "simple";
      sig.xlinkhref = coin(rng) ? "file:" + sig.id : "";
      sig.track = coin(rng) ? "L" : "";
      signal_ids.push_back(sig.id);
      owners.push_back(sig.id);
      tl.signals.push_back(std::move(sig));
    }
    timeline_ids.push_back(tl.id);
    owners.push_back(tl.id);
    set.timelines.push_back(std::move(tl));
  }

  static const std::vector<std::string> feature_pool = {"label", "pos", "note.x", "weird name", "ü", "quote\"d", "a-b"};
  std::vector<std::string> features;
  for (const auto& f : feature_pool)
    if (coin(rng, 0.6)) features.push_back(f);
  static const std::vector<std::string> types = {"wrd", "phn", "txt", "syl"};

  auto ags = 1 + pick(rng, 3);
  for (std::size_t g = 0; g < ags; ++g) {
    AG ag;
    ag.id = id + ".ag" + std::to_string(g);
    ag.agset_id = id;
    if (!timeline_ids.empty() && coin(rng)) ag.timeline_id = choose(rng, timeline_ids);
    if (coin(rng)) ag.type = "utt";
    auto anchors = pick(rng, 9);
    double offset = 0;
    for (std::size_t a = 0; a < anchors; ++a) {
      offset += std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      std::optional<double> off;
      if (coin(rng, 0.8)) off = offset;
      std::vector<std::string> sigs;
      for (const auto& s : signal_ids)
        if (coin(rng, 0.3)) sigs.push_back(s);
      add_anchor(ag, ag.id + ".n" + std::to_string(a), off, coin(rng) ? "sec" : "", sigs);
    }
    if (anchors >= 2) {
      auto arcs = pick(rng, 2 * anchors);
      for (std::size_t k = 0; k < arcs; ++k) {
        auto i = pick(rng, anchors - 1);
        auto j = i + 1 + pick(rng, anchors - 1 - i);
        FeatureRecord rec;
        for (const auto& f : features)
          if (coin(rng, 0.7)) rec[f] = random_text(rng);
        add_annotation(ag, ag.id + ".e" + std::to_string(k), ag.anchors[i].id, ag.anchors[j].id,
                       choose(rng, types), std::move(rec));
      }
    }
    owners.push_back(ag.id);
    set.ags.push_back(std::move(ag));
  }

  static const std::vector<std::string> md_names = {"title", "creator", "date", "description"};
  for (const auto& owner : owners)
    for (const auto& name : md_names)
      if (coin(rng, 0.3)) set.metadata.push_back({owner, name, random_text(rng)});
  return set;
}

AGSet random_query_corpus(Rng& rng, const std::string& id) {
  static const std::vector<std::string> labels = {"x", "y", "z"};
  static const std::vector<std::string> pos = {"n", "v"};
  AGSet set;
  set.id = id;
  auto ags = 1 + pick(rng, 3);
  for (std::size_t g = 0; g < ags; ++g) {
    AG ag;
    ag.id = id + ".g" + std::to_string(g);
    ag.agset_id = id;
    auto n = 4 + pick(rng, 9);
    for (std::size_t i = 0; i < n; ++i)
      add_anchor(ag, ag.id + ".n" + std::to_string(i), static_cast<double>(i * 4 / 5));
    std::size_t k = 0;
    auto arc = [&](std::size_t i, std::size_t j, const std::string& type) {
      FeatureRecord rec;
      if (coin(rng, 0.9)) rec["label"] = choose(rng, labels);
      if (coin(rng, 0.6)) rec["pos"] = choose(rng, pos);
      add_annotation(ag, ag.id + ".e" + std::to_string(k++), ag.anchors[i].id, ag.anchors[j].id, type,
                     std::move(rec));
    };
    for (const std::string type : {"a", "b"}) {
      auto arcs = n + pick(rng, n);
      for (std::size_t c = 0; c < arcs; ++c) {
        auto i = pick(rng, n - 1);
        auto j = std::min(n - 1, i + 1 + pick(rng, 3));
        arc(i, j, type);
      }
    }
    auto wide = 1 + pick(rng, 3);
    for (std::size_t c = 0; c < wide; ++c) {
      auto i = pick(rng, n - 1);
      auto j = i + 1 + pick(rng, n - 1 - i);
      arc(i, j, "d");
    }
    set.ags.push_back(std::move(ag));
  }
  return set;
}

agql::QueryAst random_query(Rng& rng, std::size_t max_starred) {
  using namespace agql;
  QueryAst ast;
  std::vector<std::string> anchor_vars, id_vars, order;
  std::size_t starred = 0, fresh = 0;
  auto note = [&](const std::string& v) {
    if (std::find(order.begin(), order.end(), v) == order.end()) order.push_back(v);
  };
  auto new_anchor = [&]() {
    auto v = "Z" + std::to_string(fresh++);
    anchor_vars.push_back(v);
    return v;
  };

  auto clauses = 1 + pick(rng, 2);
  std::string first_type;
  for (std::size_t c = 0; c < clauses; ++c) {
    Clause cl;
    cl.database = std::string(kDefaultDatabase);
    cl.type = (c > 0 && coin(rng, 0.6)) ? first_type : (coin(rng) ? "a" : "b");
    if (c == 0) first_type = cl.type;

    std::string start = (c == 0 || !coin(rng, 0.8)) ? (c == 0 ? "X" : new_anchor()) : "X";
    if (c == 0) anchor_vars.push_back("X");
    cl.path.push_back(Variable{start});
    note(start);

    auto arcs = 1 + pick(rng, 3);
    for (std::size_t k = 0; k < arcs; ++k) {
      if (k > 0 && coin(rng, 0.3)) {
        auto v = coin(rng, 0.25) ? anchor_vars[pick(rng, anchor_vars.size())] : new_anchor();
        cl.path.push_back(Variable{v});
        note(v);
      }
      Arc arc;
      if (starred < max_starred && coin(rng, 0.4)) {
        arc.starred = true;
        ++starred;
      } else {
        switch (pick(rng, 6)) {
          case 0: break;
          case 1: arc.constraints.push_back(LabelEq{coin(rng) ? "x" : "y"}); break;
          case 2: arc.constraints.push_back(FeatureEq{"pos", coin(rng) ? "n" : "v"}); break;
          case 3:
          case 4: {
            std::string v = (!id_vars.empty() && coin(rng, 0.2)) ? id_vars[pick(rng, id_vars.size())]
                                                                 : "I" + std::to_string(id_vars.size());
            if (std::find(id_vars.begin(), id_vars.end(), v) == id_vars.end()) id_vars.push_back(v);
            arc.constraints.push_back(IdBind{v});
            if (coin(rng, 0.4)) arc.constraints.push_back(LabelEq{"z"});
            note(v);
            break;
          }
          default:
            arc.constraints.push_back(LabelEq{"z"});
            arc.constraints.push_back(FeatureEq{"pos", "v"});
        }
      }
      cl.path.push_back(arc);
    }
    std::string end = c == 0 ? "Y" : (coin(rng, 0.6) ? "Y" : new_anchor());
    if (c == 0) anchor_vars.push_back("Y");
    cl.path.push_back(Variable{end});
    note(end);
    ast.clauses.push_back(std::move(cl));
  }

  for (const auto& v : order)
    if (coin(rng, 0.5)) ast.select_vars.push_back(v);
  if (ast.select_vars.empty()) ast.select_vars.push_back(order[pick(rng, order.size())]);
  return ast;
}

std::set<std::pair<std::string, std::string>> floyd_warshall_closure(const AG& ag, const std::string& type) {
  const auto n = ag.anchors.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[ag.anchors[i].id] = i;
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  std::vector<bool> incident(n, false);
  for (const auto& a : ag.annotations) {
    if (a.type != type) continue;
    auto s = index.at(a.start_anchor), e = index.at(a.end_anchor);
    reach[s][e] = true;
    incident[s] = incident[e] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (reach[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = true;
  std::set<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (incident[i]) out.emplace(ag.anchors[i].id, ag.anchors[i].id);
    for (std::size_t j = 0; j < n; ++j)
      if (reach[i][j]) out.emplace(ag.anchors[i].id, ag.anchors[j].id);
  }
  return out;
}

std::set<std::pair<std::string, std::string>> restrict_to_domain(
    const AG& ag, const std::set<std::pair<std::string, std::string>>& pairs, const std::string& domain) {
  auto offset = [&](const std::string& id) { return ag.find_anchor(id)->offset.value(); };
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& [a, b] : pairs)
    for (const auto& w : ag.annotations)
      if (w.type == domain && offset(w.start_anchor) <= offset(a) && offset(b) <= offset(w.end_anchor)) {
        out.emplace(a, b);
        break;
      }
  return out;
}

namespace {

using Binding = std::map<std::string, std::string>;

struct State {
  Binding binding;
  std::string at;
  bool operator<(const State& o) const { return std::tie(binding, at) < std::tie(o.binding, o.at); }
};

std::optional<std::string> resolve_feature(const std::vector<std::string>& names, const std::string& field) {
  if (std::find(names.begin(), names.end(), field) != names.end()) return field;
  std::optional<std::string> found;
  for (const auto& n : names)
    if (upper(n) == upper(field)) {
      if (found) return std::nullopt;
      found = n;
    }
  return found;
}

bool bind(Binding& b, const std::string& var, const std::string& value) {
  auto [it, fresh] = b.emplace(var, value);
  return fresh || it->second == value;
}

std::set<Binding> clause_relation(const agql::Clause& cl, const AGSet& agset, const std::optional<std::string>& domain,
                                  const std::vector<std::string>& names) {
  using namespace agql;
  std::set<Binding> out;
  if (cl.database != kDefaultDatabase && cl.database != agset.id) return out;
  for (const auto& ag : agset.ags) {
    auto closure = floyd_warshall_closure(ag, cl.type);
    if (domain) closure = restrict_to_domain(ag, closure, *domain);
    std::set<State> states;
    const auto& start = std::get<Variable>(cl.path.front()).name;
    for (const auto& a : ag.anchors) states.insert({{{start, a.id}}, a.id});
    for (std::size_t e = 1; e < cl.path.size(); ++e) {
      std::set<State> next;
      for (const auto& s : states) {
        if (const auto* v = std::get_if<Variable>(&cl.path[e])) {
          auto b = s.binding;
          if (bind(b, v->name, s.at)) next.insert({b, s.at});
          continue;
        }
        const auto& arc = std::get<Arc>(cl.path[e]);
        if (arc.starred) {
          for (auto it = closure.lower_bound({s.at, ""}); it != closure.end() && it->first == s.at; ++it)
            next.insert({s.binding, it->second});
          continue;
        }
        for (const auto& ann : ag.annotations) {
          if (ann.type != cl.type || ann.start_anchor != s.at) continue;
          auto b = s.binding;
          bool ok = true;
          for (const auto& con : arc.constraints) {
            if (const auto* id = std::get_if<IdBind>(&con)) {
              ok = ok && bind(b, id->var, ann.id);
              continue;
            }
            std::string field = std::string(kLabelFeature), value;
            if (const auto* f = std::get_if<FeatureEq>(&con)) {
              field = f->field;
              value = f->value;
            } else {
              value = std::get<LabelEq>(con).value;
            }
            auto name = resolve_feature(names, field);
            auto it = name ? ann.features.find(*name) : ann.features.end();
            ok = ok && it != ann.features.end() && it->second == value;
          }
          if (ok) next.insert({b, ann.end_anchor});
        }
      }
      states = std::move(next);
    }
    for (const auto& s : states) out.insert(s.binding);
  }
  return out;
}

}  // namespace

ResultSet relational_match(const agql::QueryAst& ast, const AGSet& agset, const std::optional<std::string>& domain) {
  auto names = agset.feature_names();
  std::set<Binding> joined{Binding{}};
  for (const auto& cl : ast.clauses) {
    auto rel = clause_relation(cl, agset, domain, names);
    std::set<Binding> next;
    for (const auto& left : joined)
      for (const auto& right : rel) {
        auto merged = left;
        bool ok = true;
        for (const auto& [k, v] : right) ok = ok && bind(merged, k, v);
        if (ok) next.insert(std::move(merged));
      }
    joined = std::move(next);
  }
  std::set<std::vector<std::string>> rows;
  for (const auto& b : joined) {
    std::vector<std::string> row;
    for (const auto& v : ast.select_vars) row.push_back(b.at(v));
    rows.insert(std::move(row));
  }
  return ResultSet{ast.select_vars, {rows.begin(), rows.end()}};
}

TableStore indexed_store(const AGSet& agset, const std::vector<std::string>& types,
                         const std::optional<std::string>& domain) {
  auto store = TableStore::in_memory();
  store_agset(store, agset);
  for (const auto& t : types)
    for (auto kind : {IndexKind::kstar, IndexKind::kstar_array}) {
      build_index(store, kind, t, std::nullopt);
      if (domain) build_index(store, kind, t, domain);
    }
  return store;
}

ResultSet run_engine(const agql::QueryAst& ast, const TableStore& store, QueryMode mode,
                     const std::optional<std::string>& domain) {
  Snapshot snap(store);
  CompileOptions options;
  options.mode = mode;
  options.domain = domain;
  return execute(compile(ast, options, &snap.catalog()), snap);
}

std::set<std::string> first_column(const ResultSet& rs) {
  std::set<std::string> out;
  for (const auto& r : rs.rows) out.insert(r.at(0));
  return out;
}

namespace {

// Lowercase outside quotes, one space between tokens, none around punctuation.
std::string canonical_spacing(const std::string& text) {
  std::string out;
  bool quoted = false, space = false;
  auto punct = [](char c) { return std::string_view("(),=[];").find(c) != std::string_view::npos; };
  for (char c : text) {
    if (quoted) {
      out += c;
      if (c == '\'') quoted = false;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty() && !punct(c) && !punct(out.back())) out += ' ';
    space = false;
    if (c == '\'') quoted = true;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// Splits on `sep` occurring outside parentheses and quotes.
std::vector<std::string> split_top(const std::string& text, const std::string& sep) {
  std::vector<std::string> parts;
  int depth = 0;
  bool quoted = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\'') quoted = !quoted;
    if (quoted) continue;
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (depth == 0 && text.compare(i, sep.size(), sep) == 0) {
      parts.push_back(text.substr(start, i - start));
      start = i + sep.size();
      i += sep.size() - 1;
    }
  }
  parts.push_back(text.substr(start));
  return parts;
}

std::size_t find_top(const std::string& text, const std::string& word) {
  auto parts = split_top(text, word);
  if (parts.size() < 2) return std::string::npos;
  return parts[0].size();
}

}  // namespace

std::string normalize_sql(const std::string& sql) {
  auto text = canonical_spacing(sql);
  while (!text.empty() && text.back() == ';') text.pop_back();
  auto from = find_top(text, " from");
  if (from == std::string::npos) from = find_top(text, "from(");
  if (from == std::string::npos) throw std::runtime_error("no FROM in: " + text);
  auto select = text.substr(0, from);
  auto rest = text.substr(from + 5);
  std::string where;
  if (auto w = find_top(rest, " where "); w != std::string::npos) {
    where = rest.substr(w + 7);
    rest = rest.substr(0, w);
  }
  auto items = split_top(rest, ",");
  for (auto& item : items) item = canonical_spacing(item);
  std::sort(items.begin(), items.end());
  auto conjuncts = split_top(where, " and ");
  for (auto& c : conjuncts) {
    c = canonical_spacing(c);
    auto sides = split_top(c, "=");
    if (sides.size() == 2 && sides[1] < sides[0]) c = sides[1] + "=" + sides[0];
  }
  std::sort(conjuncts.begin(), conjuncts.end());
  std::string out = canonical_spacing(select) + "\nfrom ";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ",\n" : "") + items[i];
  out += "\nwhere ";
  for (std::size_t i = 0; i < conjuncts.size(); ++i) out += (i ? "\nand " : "") + conjuncts[i];
  return out + ";";
}

std::string normalize_ddl(const std::string& ddl) {
  std::string out;
  bool space = false;
  auto punct = [](char c) { return std::string_view("(),;").find(c) != std::string_view::npos; };
  for (char c : ddl) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty() && !punct(c) && !punct(out.back())) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace agdb::testing
