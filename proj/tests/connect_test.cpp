#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "agdb/connect.hpp"
#include "test_support.hpp"

using namespace agdb;
using agdb::testing::code_of;

TEST(ConnectString, ParsesKnownAndExtraKeys) {
  auto spec = parse_connect_string("DSN=timit; uid=steve ;PWD=x=y;;Option=3;");
  EXPECT_EQ(spec.dsn, "timit");
  EXPECT_EQ(spec.uid, "steve");
  EXPECT_EQ(spec.pwd, "x=y");
  EXPECT_FALSE(spec.server);
  EXPECT_EQ(spec.extras.at("OPTION"), "3");
}

TEST(ConnectString, BackendValues) {
  EXPECT_EQ(parse_connect_string("BACKEND=sql-emit").backend, Backend::sql_emit);
  EXPECT_EQ(parse_connect_string("backend=Embedded").backend, Backend::embedded);
  EXPECT_EQ(code_of([] { parse_connect_string("BACKEND=oracle"); }), ErrorCode::MalformedPair);
}

TEST(ConnectString, SegmentWithoutEqualsIsMalformed) {
  EXPECT_EQ(code_of([] { parse_connect_string("DSN=timit;garbage"); }), ErrorCode::MalformedPair);
  EXPECT_EQ(parse_connect_string(""), ConnectSpec{});
}

TEST(Ini, SectionsCommentsAndCase) {
  auto ini = parse_ini("; comment\n[timit]\nDatabase = /data/timit\n# other\nuser=ann\n\n[empty]\n");
  EXPECT_EQ(ini.at("timit").at("DATABASE"), "/data/timit");
  EXPECT_EQ(ini.at("timit").at("USER"), "ann");
  EXPECT_TRUE(ini.at("empty").empty());
}

TEST(ResolveConfig, ConnectStringWinsOverConfig) {
  const char* ini = "[timit]\nSERVER=far\nUSER=ann\nPASSWORD=p1\nDATABASE=/data/timit\n";
  auto spec = resolve_config(parse_connect_string("DSN=timit;UID=bob"), ini);
  EXPECT_EQ(spec.server, "far");
  EXPECT_EQ(spec.uid, "bob");
  EXPECT_EQ(spec.pwd, "p1");
  EXPECT_EQ(spec.database, "/data/timit");
  EXPECT_EQ(spec.backend, Backend::embedded);
}

TEST(ResolveConfig, DatabaseDefaultsToDsnName) {
  auto spec = resolve_config(parse_connect_string("DSN=timit"), "[timit]\nSERVER=x\n");
  EXPECT_EQ(spec.database, "timit");
}

TEST(ResolveConfig, UnknownDsn) {
  EXPECT_EQ(code_of([] { resolve_config(parse_connect_string("DSN=nope"), "[timit]\n"); }), ErrorCode::UnknownDsn);
  EXPECT_EQ(code_of([] { resolve_config(parse_connect_string("UID=a"), "[timit]\n"); }), ErrorCode::UnknownDsn);
  auto spec = resolve_config(parse_connect_string("DSN=nope;DATABASE=/tmp/x"), "");
  EXPECT_EQ(spec.database, "/tmp/x");
}

TEST(ResolveConnection, RelativeDatabaseIsBesideConfig) {
  auto dir = std::filesystem::temp_directory_path() / "agdb_connect_test";
  std::filesystem::create_directories(dir);
  auto ini = dir / "odbc.ini";
  std::ofstream(ini) << "[timit]\nDATABASE=stores/timit\n";
  auto rc = resolve_connection("timit", ini);
  EXPECT_EQ(rc.root, dir / "stores/timit");
  EXPECT_EQ(resolve_connection("DSN=timit;DATABASE=/abs/path", ini).root, "/abs/path");
  std::filesystem::remove_all(dir);
}

TEST(ResolveConnection, DefaultConfigFromEnvironment) {
  auto dir = std::filesystem::temp_directory_path() / "agdb_connect_env";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "ini") << "[envdsn]\nDATABASE=here\n";
  ::setenv("AG_ODBC_INI", (dir / "ini").c_str(), 1);
  EXPECT_EQ(default_config_path(), dir / "ini");
  EXPECT_EQ(resolve_connection("envdsn").root, dir / "here");
  ::unsetenv("AG_ODBC_INI");
  std::filesystem::remove_all(dir);
}
