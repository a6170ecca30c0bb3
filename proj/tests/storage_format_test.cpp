#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "agdb/bit_matrix.hpp"
#include "agdb/interchange.hpp"
#include "agdb/schema.hpp"
#include "agdb/tsv.hpp"
#include "test_support.hpp"

using namespace agdb;
using agdb::testing::code_of;

TEST(Tsv, EscapeRoundTrip) {
  for (std::string raw : {"", "plain", "tab\there", "new\nline", "back\\slash", "\\N", "cr\r", "\\t literal"})
    EXPECT_EQ(tsv::unescape(tsv::escape(raw)), raw) << raw;
  EXPECT_EQ(tsv::escape("a\tb"), "a\\tb");
}

TEST(Tsv, NullDiffersFromEmpty) {
  EXPECT_EQ(tsv::encode_cell(std::nullopt), "\\N");
  EXPECT_EQ(tsv::decode_cell("\\N"), std::nullopt);
  EXPECT_EQ(tsv::decode_cell(""), tsv::Cell{""});
  EXPECT_EQ(tsv::decode_cell(tsv::encode_cell(std::string("\\N"))), tsv::Cell{"\\N"});
}

TEST(Tsv, DocumentRoundTripAndWidthCheck) {
  tsv::Document doc{{"A", "B"}, {{"1", std::nullopt}, {"x\ty", ""}}};
  EXPECT_EQ(tsv::read(tsv::write(doc)), doc);
  EXPECT_EQ(code_of([] { tsv::read("A\tB\n1\n"); }), ErrorCode::MalformedInput);
}

TEST(Tsv, DoublesRoundTrip) {
  agdb::testing::Rng rng(7);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    double v = dist(rng);
    EXPECT_EQ(tsv::parse_double(tsv::format_double(v)), v);
  }
  EXPECT_EQ(tsv::format_double(0.1), "0.1");
  EXPECT_EQ(tsv::format_double(3), "3");
  EXPECT_FALSE(tsv::parse_double("abc"));
  EXPECT_FALSE(tsv::parse_double("1.5x"));
}

TEST(BitMatrix, HexRoundTrip) {
  agdb::testing::Rng rng(3);
  for (std::size_t n : {0u, 1u, 3u, 8u, 13u, 64u, 65u}) {
    BitMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (agdb::testing::coin(rng, 0.3)) m.set(i, j);
    auto back = BitMatrix::from_hex(m.to_hex());
    EXPECT_EQ(back, m);
    EXPECT_EQ(back.count(), m.count());
  }
  BitMatrix m(2);
  m.set(0, 1);
  EXPECT_EQ(m.to_hex(), "2:4");
  EXPECT_EQ(code_of([] { BitMatrix::from_hex("2:zz"); }), ErrorCode::MalformedInput);
  EXPECT_EQ(code_of([] { BitMatrix::from_hex("nonsense"); }), ErrorCode::MalformedInput);
}

TEST(Schema, FixedTablesInOrder) {
  std::vector<std::string> names;
  for (const auto& t : schema::fixed_tables()) names.emplace_back(t.name);
  EXPECT_EQ(names, (std::vector<std::string>{"AGSET", "AG", "TIMELINE", "SIGNAL", "ANNOTATION", "ANCHOR", "METADATA"}));
  EXPECT_EQ(schema::fixed_table("ANCHOR").column_index("OFFSET"), 3u);
  EXPECT_TRUE(schema::is_reserved_table("kstar"));
  EXPECT_FALSE(schema::is_reserved_table("TIMIT"));
}

TEST(Schema, FeatureTableDdl) {
  std::vector<std::string> cols{"label", "weird name"};
  auto ddl = schema::feature_table_ddl("TIMIT", cols);
  EXPECT_NE(ddl.find("CREATE TABLE TIMIT ("), std::string::npos);
  EXPECT_NE(ddl.find("\"weird name\""), std::string::npos);
  EXPECT_NE(ddl.find("PRIMARY KEY (ANNOTATIONID)"), std::string::npos);
}

TEST(Schema, RowsRoundTrip) {
  agdb::testing::Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    auto set = agdb::testing::random_agset(rng, "R" + std::to_string(i));
    EXPECT_EQ(schema::from_rows(schema::to_rows(set)), set);
  }
}

TEST(Schema, LengthCheck) {
  AGSet set{std::string(51, 'x'), "", "", "", {}, {}, {}};
  EXPECT_EQ(code_of([&] { schema::check_lengths(schema::to_rows(set)); }), ErrorCode::StorageFailure);
  AGSet ok{"S", "1.0", "", "", {}, {}, {}};
  schema::check_lengths(schema::to_rows(ok));
}

class InterchangeRoundTrip : public ::testing::TestWithParam<ExportFormat> {};

TEST_P(InterchangeRoundTrip, RandomSets) {
  agdb::testing::Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    auto set = agdb::testing::random_agset(rng, "I" + std::to_string(i));
    auto text = export_agset(set, GetParam());
    EXPECT_EQ(import_agset(text, GetParam()), set) << text;
    EXPECT_EQ(import_agset(text), set);
  }
}

INSTANTIATE_TEST_SUITE_P(Formats, InterchangeRoundTrip, ::testing::Values(ExportFormat::aif_lite, ExportFormat::tsv));

TEST(Interchange, FilteredExportKeepsOnlyNamedFields) {
  AGSet set{"S", "", "", "", {}, {}, {}};
  AG ag{"g", "S", {}, {}, {}, {}};
  add_anchor(ag, "a", 0);
  add_anchor(ag, "b", 1);
  add_annotation(ag, "e", "a", "b", "phn", {{"label", "hv"}, {"speaker", "m1"}});
  set.ags.push_back(ag);
  for (auto format : {ExportFormat::aif_lite, ExportFormat::tsv}) {
    auto back = import_agset(export_filtered(set, {"label"}, format));
    EXPECT_EQ(back.ags[0].annotations[0].features, (FeatureRecord{{"label", "hv"}}));
  }
  EXPECT_EQ(import_agset(export_filtered(set, {"label", "speaker"}, "tsv")), set);
}

TEST(Interchange, FormatNames) {
  EXPECT_EQ(parse_export_format("aif"), ExportFormat::aif_lite);
  EXPECT_EQ(parse_export_format("aif-lite"), ExportFormat::aif_lite);
  EXPECT_EQ(parse_export_format("tsv"), ExportFormat::tsv);
  EXPECT_EQ(code_of([] { parse_export_format("xml"); }), ErrorCode::UnsupportedFormat);
  EXPECT_EQ(code_of([] { import_agset("{\"json\": true}"); }), ErrorCode::UnsupportedFormat);
}

TEST(Interchange, FeatureAttributeNames) {
  for (std::string name : {"label", "weird name", "ü", "a.b", "x-y_z", "quote\"d"}) {
    auto attr = encode_feature_attribute(name);
    EXPECT_EQ(attr.rfind("feat.", 0), 0u);
    EXPECT_EQ(attr.find(' '), std::string::npos);
    EXPECT_EQ(decode_feature_attribute(attr), name);
  }
  EXPECT_EQ(decode_feature_attribute("id"), std::nullopt);
}

TEST(Interchange, MalformedDocuments) {
  EXPECT_TRUE(code_of([] { import_agset("<AGSet id=\"S\"><AG id=\"g\">", ExportFormat::aif_lite); }));
  EXPECT_TRUE(code_of([] { import_agset("@AGSET\t1\nAGSETID\n", ExportFormat::tsv); }));
}
