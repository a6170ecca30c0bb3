// agdb: command-line front end for the annotation-graph store.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "agdb/agql.hpp"
#include "agdb/bench.hpp"
#include "agdb/closure.hpp"
#include "agdb/connect.hpp"
#include "agdb/engine.hpp"
#include "agdb/error.hpp"
#include "agdb/interchange.hpp"
#include "agdb/plan.hpp"
#include "agdb/relstore.hpp"

namespace {

using namespace agdb;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kMismatch = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::LexError:
    case ErrorCode::ParseError:
    case ErrorCode::UnboundSelectVariable:
    case ErrorCode::MalformedPair:
    case ErrorCode::UnknownDsn:
    case ErrorCode::UnsupportedFormat:
      return kUsage;
    case ErrorCode::OracleMismatch:
      return kMismatch;
    default:
      return kDataError;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::StorageFailure, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::StorageFailure, "cannot write " + path);
  out << text;
}

std::set<std::string> split_list(const std::string& text) {
  std::set<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.insert(item);
  return out;
}

struct StoreArgs {
  std::string dsn;
  std::string store;
  std::string config;

  void add_to(CLI::App& app) {
    app.add_option("--dsn", dsn, "connect string (DSN=name;...) or bare DSN name");
    app.add_option("--store", store, "store directory, bypassing DSN resolution");
    app.add_option("--config", config, "odbc.ini-style config file (default $AG_ODBC_INI or ~/.odbc.ini)");
  }

  bool given() const { return !dsn.empty() || !store.empty(); }

  ResolvedConnection resolve() const {
    if (!store.empty()) {
      ResolvedConnection rc;
      rc.spec.backend = Backend::embedded;
      rc.root = store;
      return rc;
    }
    if (dsn.empty()) throw UsageError("one of --dsn or --store is required");
    std::optional<std::filesystem::path> cfg;
    if (!config.empty()) cfg = config;
    return resolve_connection(dsn, cfg);
  }

  TableStore open(bool writable) const {
    auto rc = resolve();
    if (rc.spec.backend == Backend::sql_emit)
      throw UsageError("the sql-emit backend only supports import and sql");
    return writable ? TableStore::open(rc.root) : TableStore::open_read_only(rc.root);
  }
};

void print_rows(const ResultSet& rs) {
  for (const auto& row : rs.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "\t" : "") << row[i];
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agdb: annotation-graph store, query compiler and closure indexes"};
  app.require_subcommand(1);
  StoreArgs store_args;

  // import
  auto* import_cmd = app.add_subcommand("import", "import AGSets from aif-lite or tsv files");
  std::vector<std::string> import_files;
  std::string import_format;
  std::string import_role;
  import_cmd->add_option("files", import_files, "input files")->required();
  import_cmd->add_option("--format", import_format, "aif|tsv (default: detect)");
  import_cmd->add_option("--role", import_role, "enforce this role's column policy");
  store_args.add_to(*import_cmd);

  // export
  auto* export_cmd = app.add_subcommand("export", "export one AGSet");
  std::string export_agset_id, export_format = "aif", export_fields, export_out;
  export_cmd->add_option("--agset", export_agset_id)->required();
  export_cmd->add_option("--format", export_format, "aif|tsv");
  export_cmd->add_option("--fields", export_fields, "comma-separated feature whitelist");
  export_cmd->add_option("--out", export_out, "output file (default stdout)");
  store_args.add_to(*export_cmd);

  // index build
  auto* index_cmd = app.add_subcommand("index", "closure indexes");
  index_cmd->require_subcommand(1);
  auto* build_cmd = index_cmd->add_subcommand("build", "build a K* or K*-array index");
  std::string index_type, index_domain, index_mode = "kstar";
  build_cmd->add_option("--type", index_type)->required();
  build_cmd->add_option("--domain", index_domain, "restrict to spans of this annotation type");
  build_cmd->add_option("--mode", index_mode, "kstar|array");
  store_args.add_to(*build_cmd);

  // query
  auto* query_cmd = app.add_subcommand("query", "run an AGQL query");
  std::string query_text, query_file, query_mode = "kstar", query_domain, query_corpus;
  bool explain = false, explain_plan = false, check = false;
  double timeout = 0;
  query_cmd->add_option("text", query_text, "query text");
  query_cmd->add_option("--file", query_file, "read the query from a file");
  query_cmd->add_option("--mode", query_mode, "kstar|array");
  query_cmd->add_option("--domain", query_domain, "use the domain-restricted index, e.g. wrd");
  query_cmd->add_option("--corpus", query_corpus, "corpus meant by db");
  query_cmd->add_flag("--explain", explain, "print the SQL and run nothing");
  query_cmd->add_flag("--explain-plan", explain_plan, "print the plan and run nothing");
  query_cmd->add_flag("--check", check, "compare the answer with the exhaustive matcher");
  query_cmd->add_option("--timeout", timeout, "seconds before the query is abandoned");
  store_args.add_to(*query_cmd);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "benchmark queries 1-4 and long joins on a synthetic corpus");
  double bench_scale = 0.1;
  std::uint64_t bench_seed = 42;
  std::string bench_out;
  std::size_t bench_max_n = 5;
  double bench_budget = 10;
  int bench_runs = 5;
  bench_cmd->add_option("--scale", bench_scale, "fraction of the 1,680-utterance corpus");
  bench_cmd->add_option("--seed", bench_seed);
  bench_cmd->add_option("--out", bench_out, "JSON report path")->required();
  bench_cmd->add_option("--max-n", bench_max_n, "longest long-join pattern");
  bench_cmd->add_option("--budget", bench_budget, "seconds per long-join cell before timeout");
  bench_cmd->add_option("--runs", bench_runs, "timed runs per cell (median reported)");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "check an AGSet against the model invariants");
  std::string validate_agset_id;
  std::vector<std::string> validate_files;
  validate_cmd->add_option("--agset", validate_agset_id, "AGSet in the store");
  validate_cmd->add_option("--file", validate_files, "interchange files to check instead");
  store_args.add_to(*validate_cmd);

  // sql
  auto* sql_cmd = app.add_subcommand("sql", "emit an ANSI SQL script of the store");
  std::string sql_out;
  sql_cmd->add_option("--out", sql_out, "output file (default stdout)");
  store_args.add_to(*sql_cmd);

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic corpus file");
  double gen_scale = 0.1;
  std::uint64_t gen_seed = 42;
  std::string gen_format = "tsv", gen_out;
  gen_cmd->add_option("--scale", gen_scale);
  gen_cmd->add_option("--seed", gen_seed);
  gen_cmd->add_option("--format", gen_format, "aif|tsv");
  gen_cmd->add_option("--out", gen_out, "output file (default stdout)");

  // policy
  auto* policy_cmd = app.add_subcommand("policy", "set the readonly columns of a role");
  std::string policy_corpus, policy_role, policy_readonly;
  policy_cmd->add_option("--corpus", policy_corpus)->required();
  policy_cmd->add_option("--role", policy_role)->required();
  policy_cmd->add_option("--readonly", policy_readonly, "comma-separated columns");
  store_args.add_to(*policy_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  std::string query_source;
  try {
    if (*import_cmd) {
      auto rc = store_args.resolve();
      std::optional<TableStore> store;
      if (rc.spec.backend != Backend::sql_emit) store = TableStore::open(rc.root);
      for (const auto& file : import_files) {
        auto text = read_file(file);
        auto agset = import_format.empty() ? import_agset(text) : import_agset(text, parse_export_format(import_format));
        if (!store) {
          std::cout << emit_sql(agset);
          continue;
        }
        StoreOptions opts;
        if (!import_role.empty()) opts.role = import_role;
        store_agset(*store, agset, opts);
        std::size_t annotations = 0;
        for (const auto& ag : agset.ags) annotations += ag.annotations.size();
        std::cerr << "stored " << agset.id << ": " << agset.ags.size() << " AGs, " << annotations
                  << " annotations\n";
      }
      return kOk;
    }

    if (*export_cmd) {
      auto store = store_args.open(false);
      auto agset = load_agset(store, export_agset_id);
      auto format = parse_export_format(export_format);
      std::set<std::string> fields;
      if (export_fields.empty()) {
        auto names = agset.feature_names();
        fields.insert(names.begin(), names.end());
      } else {
        fields = split_list(export_fields);
      }
      write_output(export_out, export_filtered(agset, fields, format));
      return kOk;
    }

    if (*build_cmd) {
      auto store = store_args.open(true);
      std::optional<std::string> domain;
      if (!index_domain.empty()) domain = index_domain;
      auto stats = build_index(store, parse_index_kind(index_mode), index_type, domain);
      std::cout << to_string(stats.kind) << "\t" << stats.tag << "\t"
                << (stats.kind == IndexKind::kstar ? stats.tuples : stats.matrices) << "\t" << stats.ags << " AGs\n";
      return kOk;
    }

    if (*query_cmd) {
      if (!query_file.empty()) query_source = read_file(query_file);
      else query_source = query_text;
      if (query_source.empty()) throw UsageError("give the query text or --file");

      CompileOptions options;
      options.mode = parse_query_mode(query_mode);
      if (!query_domain.empty()) options.domain = query_domain;
      if (!query_corpus.empty()) options.default_corpus = query_corpus;
      auto ast = agql::parse(query_source);

      if (explain || explain_plan) {
        std::optional<Catalog> catalog;
        if (store_args.given()) catalog = catalog_of(store_args.open(false));
        auto plan = compile(ast, options, catalog ? &*catalog : nullptr);
        if (explain) std::cout << print_sql(plan);
        if (explain_plan) std::cout << plan_to_text(plan);
        return kOk;
      }

      auto store = store_args.open(false);
      Snapshot snap(store);
      auto plan = compile(ast, options, &snap.catalog());
      ExecuteOptions exec;
      if (timeout > 0)
        exec.deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(timeout));
      auto result = execute(plan, snap, exec);
      if (check) {
        std::optional<std::string> corpus = options.default_corpus;
        if (!corpus && snap.catalog().feature_columns.size() == 1)
          corpus = snap.catalog().feature_columns.begin()->first;
        if (!corpus) throw UsageError("--check needs --corpus when the store holds several corpora");
        auto expected = oracle_match(ast, load_agset(store, *corpus), options.domain);
        if (expected != result)
          throw Error(ErrorCode::OracleMismatch, "engine returned " + std::to_string(result.rows.size()) +
                                                     " rows, exhaustive matcher " +
                                                     std::to_string(expected.rows.size()));
      }
      print_rows(result);
      return kOk;
    }

    if (*bench_cmd) {
      auto spec = bench::timit_like(bench_scale, bench_seed);
      auto agset = bench::generate_corpus(spec);
      auto store = TableStore::in_memory();
      bench::prepare_store(store, agset);
      bench::BenchOptions opts;
      opts.runs = bench_runs;
      opts.long_join_budget = std::chrono::duration<double>(bench_budget);
      auto report = bench::run_benchmarks(agset, store, opts);
      report.long_joins = bench::run_long_joins(agset, store, bench_max_n, opts);
      write_output(bench_out, bench::to_json(report));
      std::cout << bench::to_table(report);
      return kOk;
    }

    if (*validate_cmd) {
      std::vector<AGSet> sets;
      if (!validate_files.empty()) {
        for (const auto& f : validate_files) sets.push_back(import_agset(read_file(f)));
      } else {
        if (validate_agset_id.empty()) throw UsageError("give --agset or --file");
        sets.push_back(load_agset(store_args.open(false), validate_agset_id));
      }
      bool clean = true;
      for (const auto& s : sets) {
        for (const auto& v : validate(s)) {
          clean = false;
          std::cout << s.id << "\t" << v.object_id << "\t" << v.rule << "\t" << v.message << "\n";
        }
      }
      return clean ? kOk : kDataError;
    }

    if (*sql_cmd) {
      auto rc = store_args.resolve();
      write_output(sql_out, emit_sql(TableStore::open_read_only(rc.root)));
      return kOk;
    }

    if (*gen_cmd) {
      auto agset = bench::generate_corpus(bench::timit_like(gen_scale, gen_seed));
      write_output(gen_out, export_agset(agset, parse_export_format(gen_format)));
      return kOk;
    }

    if (*policy_cmd) {
      auto store = store_args.open(true);
      set_column_policy(store, ColumnPolicy{policy_corpus, policy_role, split_list(policy_readonly)});
      return kOk;
    }
  } catch (const QueryError& e) {
    std::cerr << "agdb: " << e.what() << "\n";
    if (!query_source.empty() && query_source.find('\n') == std::string::npos) {
      std::cerr << "  " << query_source << "\n  " << std::string(e.position(), ' ') << "^\n";
    }
    return exit_code_for(e.code());
  } catch (const Error& e) {
    std::cerr << "agdb: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const UsageError& e) {
    std::cerr << "agdb: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
