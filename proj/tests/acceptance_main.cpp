// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "agdb/bench.hpp"
#include "agdb/closure.hpp"
#include "agdb/engine.hpp"
#include "agdb/relstore.hpp"
#include "agdb/schema.hpp"
#include "test_support.hpp"

using namespace agdb;
namespace t = agdb::testing;

namespace {

using Clock = std::chrono::steady_clock;

struct Failure {
  std::string detail;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw Failure{detail};
}

std::string seconds_since(Clock::time_point start) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f s", std::chrono::duration<double>(Clock::now() - start).count());
  return buf;
}

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& i : items) out += (out.empty() ? "" : ",") + i;
  return "{" + out + "}";
}

// --- engine vs exhaustive matcher -------------------------------------------

std::string engine_equivalence() {
  auto start = Clock::now();
  t::Rng rng(20240601);
  std::size_t mismatches = 0, rows = 0, with_domain = 0;
  std::string first;
  for (int pair = 0; pair < 500; ++pair) {
    auto corpus = t::random_query_corpus(rng, "EQ");
    auto ast = t::random_query(rng, 3);
    std::optional<std::string> domain;
    if (t::coin(rng, 0.25)) {
      domain = "d";
      ++with_domain;
    }
    auto store = t::indexed_store(corpus, {"a", "b"}, domain);
    auto expected = t::relational_match(ast, corpus, domain);
    rows += expected.rows.size();
    bool ok = oracle_match(ast, corpus, domain) == expected;
    for (auto mode : {QueryMode::kstar, QueryMode::kstar_array})
      ok = ok && t::run_engine(ast, store, mode, domain) == expected;
    if (!ok && mismatches++ == 0) first = agql::pretty_print(ast);
  }
  auto took = std::chrono::duration<double>(Clock::now() - start).count();
  require(mismatches == 0, std::to_string(mismatches) + " mismatches, first: " + first);
  require(took < 120, "took " + seconds_since(start));
  return "500 pairs (" + std::to_string(with_domain) + " domain-restricted, " + std::to_string(rows) +
         " answer rows), 0 mismatches in both modes, " + seconds_since(start);
}

// --- queries 1-4 on a hand-built fixture -------------------------------------

AGSet query_fixture() {
  AGSet set{"TIMIT", "1.0", "", "", {}, {}, {}};
  auto add_ag = [&](const std::string& ag_id, const std::vector<std::pair<std::string, std::vector<std::string>>>& words) {
    AG ag{ag_id, "TIMIT", {}, {}, {}, {}};
    int anchor = 0, phone = 0;
    auto next_anchor = [&] {
      auto id = ag_id + ".a" + std::to_string(anchor);
      add_anchor(ag, id, anchor * 10.0);
      ++anchor;
      return id;
    };
    auto at = next_anchor();
    for (const auto& [word, phones] : words) {
      auto word_start = at;
      for (const auto& p : phones) {
        auto to = next_anchor();
        add_annotation(ag, ag_id + ".p" + std::to_string(phone++), at, to, "phn", {{"label", p}});
        at = to;
      }
      add_annotation(ag, word, word_start, at, "wrd", {{"label", word}});
    }
    set.ags.push_back(std::move(ag));
  };
  add_ag("u1", {{"w1", {"hv", "ix", "dcl", "d"}},
                {"w2", {"hv", "dcl"}},
                {"w3", {"ix", "dcl", "ae"}},
                {"w4", {"hv", "ae", "ix"}},
                {"w5", {"hv", "ix", "ae"}},
                {"w6", {"dcl", "ae"}},
                {"w7", {"hv", "ix"}},
                {"w8", {"hv"}},
                {"w9", {"ae", "hv", "dcl"}},
                {"w10", {"hv", "aa"}},
                {"w11", {"dcl"}}});
  add_ag("u2", {{"w12", {"hv", "dcl", "ix"}}, {"w13", {"dcl", "hv"}}});
  return set;
}

std::string queries_on_fixture() {
  auto set = query_fixture();
  require(validate(set).empty(), "fixture is invalid");
  auto store = t::indexed_store(set, {"phn"}, std::string("wrd"));
  const std::vector<std::set<std::string>> expected = {
      {"w1", "w12", "w2"},
      {"w1", "w10", "w12", "w2", "w4", "w5", "w7", "w8"},
      {"w12", "w4", "w7"},
      {"w1", "w11", "w12", "w13", "w2", "w3", "w6", "w9"},
  };
  std::ostringstream summary;
  for (int q = 0; q < 4; ++q) {
    auto ast = agql::parse(bench::kQueries[q]);
    for (const std::optional<std::string> domain : {std::optional<std::string>{}, std::optional<std::string>{"wrd"}}) {
      auto oracle = oracle_match(ast, set, domain);
      require(t::first_column(oracle) == expected[q],
              "query " + std::to_string(q + 1) + " oracle gave " + join(t::first_column(oracle)));
      require(t::relational_match(ast, set, domain) == oracle, "query " + std::to_string(q + 1) + " oracles disagree");
      for (auto mode : {QueryMode::kstar, QueryMode::kstar_array}) {
        auto got = t::run_engine(ast, store, mode, domain);
        require(got == oracle, "query " + std::to_string(q + 1) + " " + std::string(to_string(mode)) +
                                   (domain ? " phn/wrd" : " phn") + " gave " + join(t::first_column(got)));
      }
    }
    summary << (q ? "; " : "") << "Q" << q + 1 << "=" << join(expected[q]);
  }
  return summary.str() + " (adjacency w2, trailing ix w4/w7, leading zero-length w6/w11)";
}

// --- index laws at 1/10 scale ------------------------------------------------

std::string index_laws() {
  auto set = bench::generate_corpus(bench::timit_like(0.1, 42));
  require(set.ags.size() == 168, "corpus has " + std::to_string(set.ags.size()) + " AGs");
  auto store = TableStore::in_memory();
  bench::prepare_store(store, set);
  std::map<std::string, std::size_t> tuples;
  const auto& k = store.table(schema::kKstar);
  for (const auto& row : k.rows) ++tuples[*row[k.column("TYPE")]];
  auto matrices = store.table(schema::kKstarArray).rows.size();
  require(tuples["phn/wrd"] < tuples["phn"],
          "|K*_phn/wrd| = " + std::to_string(tuples["phn/wrd"]) + " >= |K*_phn| = " + std::to_string(tuples["phn"]));
  require(matrices == 168 * 3, "matrix count " + std::to_string(matrices));
  return "|K*_phn/wrd| = " + std::to_string(tuples["phn/wrd"]) + " < |K*_phn| = " + std::to_string(tuples["phn"]) +
         "; K*-array matrices = " + std::to_string(matrices) + " = 168 x 3";
}

// --- performance trends ------------------------------------------------------

std::string performance_trends() {
  auto set = bench::generate_corpus(bench::timit_like(0.1, 42));
  auto store = TableStore::in_memory();
  bench::prepare_store(store, set);
  bench::BenchOptions options;  // 1 warm-up, median of 5, 10 s long-join budget
  auto report = bench::run_benchmarks(set, store, options);
  auto median = [&](QueryMode mode, bool restricted) {
    for (const auto& timing : report.timings)
      if (timing.query == 4 && timing.mode == mode && timing.domain.has_value() == restricted) return timing.median;
    throw Failure{"missing query 4 timing"};
  };
  double unrestricted = median(QueryMode::kstar, false);
  double restricted = median(QueryMode::kstar, true);
  double array = median(QueryMode::kstar_array, false);
  char buf[200];
  std::snprintf(buf, sizeof buf, "Q4 kstar phn %.4f s, kstar phn/wrd %.4f s, kstar-array phn %.4f s", unrestricted,
                restricted, array);
  std::string summary = buf;
  require(unrestricted > restricted && unrestricted > array, summary);

  auto joins = bench::run_long_joins(set, store, 5, options);
  require(joins.size() == 5, "long-join rows: " + std::to_string(joins.size()));
  std::string trend;
  double last = 0;
  bool monotone = true;
  for (const auto& row : joins) {
    double v = row.kstar.median ? *row.kstar.median : std::numeric_limits<double>::infinity();
    std::snprintf(buf, sizeof buf, "%s%s", trend.empty() ? "" : " <= ",
                  row.kstar.timed_out ? "timeout" : std::to_string(v).c_str());
    trend += buf;
    monotone = monotone && v >= last;
    last = v;
  }
  require(monotone, "kstar long-join times not non-decreasing: " + trend);
  const auto& five = joins.back().kstar_array;
  require(five.median && *five.median < 10.0, "kstar-array n=5 did not finish within 10 s");
  std::snprintf(buf, sizeof buf, "; long-join kstar n=1..5: %s s; kstar-array n=5 %.5f s", trend.c_str(), *five.median);
  return summary + buf;
}

// --- schema fidelity ---------------------------------------------------------

std::string ddl_golden() {
  std::string emitted;
  for (const auto& table : schema::fixed_tables()) emitted += std::string(table.ddl) + ";\n\n";
  auto golden = t::read_text(GOLDEN_DIR "/ddl_fixed_tables.sql");
  require(t::normalize_ddl(emitted) == t::normalize_ddl(golden),
          "emitted DDL differs:\n" + t::normalize_ddl(emitted) + "\nvs\n" + t::normalize_ddl(golden));
  return "7 CREATE TABLE statements token-equal to the golden listing";
}

// --- SQL goldens -------------------------------------------------------------

std::string sql_goldens() {
  auto ast = agql::parse(bench::kQueries[0]);
  std::string summary;
  for (auto [mode, file] : {std::pair{QueryMode::kstar, "query1_kstar.sql"},
                            std::pair{QueryMode::kstar_array, "query1_kstar_array.sql"}}) {
    CompileOptions options;
    options.mode = mode;
    options.default_corpus = "TIMIT";
    auto printed = t::normalize_sql(print_sql(compile(ast, options)));
    auto golden = t::normalize_sql(t::read_text(std::string(GOLDEN_DIR "/") + file));
    require(printed == golden, std::string(file) + " differs:\n" + printed + "\nvs\n" + golden);
    summary += (summary.empty() ? "" : ", ") + std::string(file);
  }
  return "print_sql(Query 1) matches " + summary;
}

// --- round trip, column policy, version schedules ---------------------------

std::string round_trips() {
  auto dir = std::filesystem::temp_directory_path() / "agdb_acceptance_roundtrip";
  std::filesystem::remove_all(dir);
  t::Rng rng(77);
  std::vector<AGSet> sets;
  {
    auto store = TableStore::open(dir);
    for (int i = 0; i < 200; ++i) {
      sets.push_back(t::random_agset(rng, "RT" + std::to_string(i)));
      store_agset(store, sets.back());
      require(load_agset(store, sets.back().id) == sets.back(), "in-session load differs for " + sets.back().id);
    }
  }
  auto reopened = TableStore::open_read_only(dir);
  for (const auto& s : sets) require(load_agset(reopened, s.id) == s, "reopened load differs for " + s.id);
  std::filesystem::remove_all(dir);
  return "200 random AGSets equal after store/load and after reopening the store";
}

std::string flip_case(std::string s) {
  for (auto& c : s) c = std::isupper(static_cast<unsigned char>(c)) ? std::tolower(c) : std::toupper(c);
  return s;
}

std::string policy_suite() {
  t::Rng rng(91);
  std::size_t attempts = 0, sets_used = 0;
  for (int i = 0; sets_used < 25 && i < 200; ++i) {
    auto set = t::random_agset(rng, "PS" + std::to_string(i));
    auto names = set.feature_names();
    if (names.empty()) continue;
    ++sets_used;
    auto store = TableStore::in_memory();
    store_agset(store, set);
    std::set<std::string> readonly;
    for (const auto& n : names)
      if (t::coin(rng)) readonly.insert(n);
    if (readonly.empty()) readonly.insert(names.front());
    set_column_policy(store, {set.id, "annotator", readonly});
    auto before = load_agset(store, set.id);

    auto rejected = [&](const std::function<void()>& write, const std::string& what) {
      ++attempts;
      require(t::code_of(write) == ErrorCode::PolicyViolation, what + " was not rejected");
    };
    for (const auto& ag : set.ags)
      for (const auto& ann : ag.annotations)
        for (const auto& col : readonly) {
          auto v = row_version(store, ann.id);
          rejected([&] { update_features(store, ann.id, {{col, "changed"}}, "annotator", v); },
                   "update of " + col + " on " + ann.id);
          if (flip_case(col) != col)
            rejected([&] { update_features(store, ann.id, {{flip_case(col), "changed"}}, "annotator", v); },
                     "case-folded update of " + col);
          auto edited = set;
          edited.find_ag(ag.id)->find_annotation(ann.id)->features[col] = "changed";
          rejected([&] { store_agset(store, edited, {"annotator"}); }, "store changing " + col + " of " + ann.id);
          auto erased = set;
          if (erased.find_ag(ag.id)->find_annotation(ann.id)->features.erase(col))
            rejected([&] { store_agset(store, erased, {"annotator"}); }, "store removing " + col + " of " + ann.id);
        }
    require(load_agset(store, set.id) == before, "rejected writes changed " + set.id);
  }
  return std::to_string(attempts) + " writes to readonly columns over " + std::to_string(sets_used) +
         " AGSets, all rejected";
}

std::string version_schedules() {
  t::Rng rng(4242);
  std::size_t ok = 0, conflicts = 0, violations = 0;
  for (int schedule = 0; schedule < 1000; ++schedule) {
    AGSet set{"VS", "", "", "", {}, {}, {}};
    AG ag{"VS.g", "VS", {}, {}, {}, {}};
    for (int i = 0; i < 3; ++i) add_anchor(ag, "VS.a" + std::to_string(i), i);
    add_annotation(ag, "VS.x", "VS.a0", "VS.a1", "phn", {{"label", "x0"}, {"note", ""}});
    add_annotation(ag, "VS.y", "VS.a1", "VS.a2", "phn", {{"label", "y0"}, {"note", ""}});
    set.ags.push_back(ag);
    auto store = TableStore::in_memory();
    store_agset(store, set);
    set_column_policy(store, {"VS", "annotator", {"label"}});

    struct Op {
      std::string annotation, column, value, role;
    };
    struct Client {
      std::vector<Op> ops;
      std::size_t next = 0;
      bool reading = true;
      std::uint64_t seen = 0;
    };
    std::map<std::string, std::uint64_t> version{{"VS.x", 1}, {"VS.y", 1}};
    std::map<std::string, FeatureRecord> features{{"VS.x", {{"label", "x0"}, {"note", ""}}},
                                                  {"VS.y", {{"label", "y0"}, {"note", ""}}}};
    std::vector<Client> clients(2 + t::pick(rng, 3));
    for (std::size_t c = 0; c < clients.size(); ++c)
      for (std::size_t k = 0, n = 1 + t::pick(rng, 4); k < n; ++k)
        clients[c].ops.push_back({t::coin(rng) ? "VS.x" : "VS.y", t::coin(rng, 0.3) ? "label" : "note",
                                  "c" + std::to_string(c) + "k" + std::to_string(k),
                                  t::coin(rng, 0.5) ? "annotator" : "admin"});

    for (;;) {
      std::vector<std::size_t> live;
      for (std::size_t c = 0; c < clients.size(); ++c)
        if (clients[c].next < clients[c].ops.size()) live.push_back(c);
      if (live.empty()) break;
      auto& client = clients[live[t::pick(rng, live.size())]];
      const auto& op = client.ops[client.next];
      if (client.reading) {
        client.seen = row_version(store, op.annotation);
        require(client.seen == version[op.annotation], "read saw an unexpected version");
        client.reading = false;
        continue;
      }
      std::optional<ErrorCode> expected;
      if (op.role == "annotator" && op.column == "label") expected = ErrorCode::PolicyViolation;
      else if (client.seen != version[op.annotation]) expected = ErrorCode::VersionConflict;
      auto got = t::code_of([&] { update_features(store, op.annotation, {{op.column, op.value}}, op.role, client.seen); });
      require(got == expected, "schedule " + std::to_string(schedule) + ": write outcome differs from the model");
      if (!expected) {
        ++version[op.annotation];
        features[op.annotation][op.column] = op.value;
        ++ok;
      } else if (*expected == ErrorCode::VersionConflict) {
        ++conflicts;
      } else {
        ++violations;
      }
      client.reading = true;
      ++client.next;
    }
    for (const auto& [id, v] : version) {
      require(row_version(store, id) == v, "final version of " + id);
      require(read_features(store, id) == features[id], "final features of " + id);
    }
  }
  return "1000 schedules: " + std::to_string(ok) + " writes applied, " + std::to_string(conflicts) +
         " version conflicts, " + std::to_string(violations) + " policy rejections, all as modelled";
}

std::string round_trip_and_policy() {
  return round_trips() + "; " + policy_suite() + "; " + version_schedules();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"engine-oracle-equivalence", engine_equivalence},
      {"queries-1-4-semantics", queries_on_fixture},
      {"index-laws", index_laws},
      {"performance-trends", performance_trends},
      {"schema-fidelity", ddl_golden},
      {"sql-golden-files", sql_goldens},
      {"round-trip-and-policy", round_trip_and_policy},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    std::string line;
    try {
      line = "PASS " + name + ": " + check();
    } catch (const Failure& f) {
      line = "FAIL " + name + ": " + f.detail;
      ++failed;
    } catch (const std::exception& e) {
      line = "FAIL " + name + ": exception: " + e.what();
      ++failed;
    }
    std::cout << line << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " of " : "all ") << criteria.size() << " criteria "
            << (failed ? "failed" : "passed") << std::endl;
  return failed ? 1 : 0;
}
