#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("agdb_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) {
    auto out = dir_ / "stdout", err = dir_ / "stderr";
    auto cmd = "cd '" + dir_.string() + "' && '" AGDB_EXE "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
    int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, agdb::testing::read_text(out.string()),
            agdb::testing::read_text(err.string())};
  }

  void build_store() {
    ASSERT_EQ(run("generate --scale 0.01 --seed 42 --out corpus.tsv").status, 0);
    ASSERT_EQ(run("import corpus.tsv --store st").status, 0);
    for (const char* mode : {"kstar", "array"}) {
      ASSERT_EQ(run(std::string("index build --type phn --mode ") + mode + " --store st").status, 0);
      ASSERT_EQ(run(std::string("index build --type phn --domain wrd --mode ") + mode + " --store st").status, 0);
    }
  }

  fs::path dir_;
};

const char* kQuery4 = "'SELECT I WHERE X.[id:I].Y <- db/wrd AND X.[]*.[:dcl].[]*.Y <- db/phn;'";

}  // namespace

TEST_F(Cli, QueryAgreesAcrossModesAndWithCheck) {
  build_store();
  auto kstar = run(std::string("query ") + kQuery4 + " --store st --check");
  ASSERT_EQ(kstar.status, 0) << kstar.err;
  EXPECT_FALSE(kstar.out.empty());
  auto array = run(std::string("query ") + kQuery4 + " --store st --mode array --check");
  EXPECT_EQ(array.out, kstar.out);
  auto domain = run(std::string("query ") + kQuery4 + " --store st --mode array --domain wrd --check");
  EXPECT_EQ(domain.status, 0) << domain.err;
}

TEST_F(Cli, QueryFromFileAndExplain) {
  build_store();
  std::ofstream(dir_ / "q.agql") << "SELECT I WHERE X.[id:I].Y <- db/wrd AND\n  X.[:hv].[]*.[:dcl].[]*.Y <- db/phn;\n";
  EXPECT_EQ(run("query --file q.agql --store st").status, 0);
  auto sql = run("query --file q.agql --explain");
  EXPECT_EQ(sql.status, 0);
  EXPECT_EQ(sql.out.rfind("SELECT W.annotationid", 0), 0u);
  auto plan = run("query --file q.agql --explain-plan --mode array");
  EXPECT_NE(plan.out.find("predicate cell K"), std::string::npos);
}

TEST_F(Cli, ExitCodes) {
  build_store();
  auto parse = run("query 'SELECT I WHERE X.[:hv]*.Y <- db/phn;' --store st");
  EXPECT_EQ(parse.status, 1);
  EXPECT_NE(parse.err.find("ParseError"), std::string::npos);
  EXPECT_NE(parse.err.find("^"), std::string::npos);
  EXPECT_EQ(run("query 'SELECT I WHERE X.[id:I].[]*.Y <- db/txt;' --store st").status, 2);  // MissingIndex
  EXPECT_EQ(run("export --agset NOPE --store st").status, 2);
  EXPECT_EQ(run("export --agset TIMIT --format json --store st").status, 1);
  EXPECT_EQ(run("frobnicate").status, 1);
  EXPECT_EQ(run("query 'SELECT I WHERE X.[id:I].Y <- db/wrd;' --dsn 'DSN=x;bogus'").status, 1);
  EXPECT_EQ(run("query 'SELECT I WHERE X.[id:I].Y <- db/wrd;' --dsn nowhere --config missing.ini").status, 1);
}

TEST_F(Cli, DsnResolution) {
  build_store();
  std::ofstream(dir_ / "odbc.ini") << "[timit]\nDATABASE=st\n";
  auto r = run(std::string("query ") + kQuery4 + " --dsn timit --config odbc.ini");
  EXPECT_EQ(r.status, 0) << r.err;
  auto s = run(std::string("query ") + kQuery4 + " --dsn 'DSN=timit;UID=ann' --config odbc.ini");
  EXPECT_EQ(s.out, r.out);
}

TEST_F(Cli, ExportImportRoundTrip) {
  build_store();
  ASSERT_EQ(run("export --agset TIMIT --format aif --out t.xml --store st").status, 0);
  ASSERT_EQ(run("import t.xml --store other").status, 0);
  auto a = run("export --agset TIMIT --format tsv --store st");
  auto b = run("export --agset TIMIT --format tsv --store other");
  EXPECT_EQ(a.out, b.out);
  auto filtered = run("export --agset TIMIT --format tsv --fields nothing --store st");
  EXPECT_EQ(filtered.out.find("\thv\n"), std::string::npos);
  EXPECT_EQ(run("validate --agset TIMIT --store st").status, 0);
  EXPECT_EQ(run("validate --file t.xml").status, 0);
}

TEST_F(Cli, PolicyAndSqlEmit) {
  build_store();
  EXPECT_EQ(run("policy --corpus TIMIT --role annotator --readonly label --store st").status, 0);
  ASSERT_EQ(run("export --agset TIMIT --format tsv --out t.tsv --store st").status, 0);
  EXPECT_EQ(run("import t.tsv --role annotator --store st").status, 0);
  auto sql = run("import corpus.tsv --dsn 'DSN=x;DATABASE=/nonexistent;BACKEND=sql-emit'");
  EXPECT_EQ(sql.status, 0) << sql.err;
  EXPECT_NE(sql.out.find("CREATE TABLE TIMIT ("), std::string::npos);
  EXPECT_FALSE(fs::exists("/nonexistent"));
  // Re-importing cleared the indexes.
  auto dump = run("sql --store st");
  EXPECT_EQ(dump.out.find("INSERT INTO Kstar_array"), std::string::npos);
  ASSERT_EQ(run("index build --type phn --mode array --store st").status, 0);
  EXPECT_NE(run("sql --store st").out.find("INSERT INTO Kstar_array"), std::string::npos);
}

TEST_F(Cli, BenchWritesJson) {
  auto r = run("bench --scale 0.01 --seed 42 --runs 1 --max-n 2 --out report.json");
  ASSERT_EQ(r.status, 0) << r.err;
  auto json = nlohmann::json::parse(agdb::testing::read_text((dir_ / "report.json").string()));
  EXPECT_EQ(json["matrix_count"].get<int>(), 3 * 17);
  EXPECT_EQ(json["long_joins"].size(), 2u);
  EXPECT_NE(r.out.find("query 1"), std::string::npos);
}
