#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "agdb/model.hpp"

namespace agdb {

/// Interchange formats.
///
/// aif-lite is an XML-shaped document:
///
///   <AGSet id=.. version=.. xmlns=.. xlink=..>
///     <Metadata owner=.. name=.. value=../>
///     <Timeline id=..><Signal id=.. mimeClass=.. .../></Timeline>
///     <AG id=.. [timeline=..] [type=..]>
///       <Anchor id=.. [offset=..] unit=.. [signals="s1 s2"]/>
///       <Annotation id=.. type=.. start=.. end=.. feat.NAME=VALUE .../>
///     </AG>
///   </AGSet>
///
/// Feature names are carried in attribute names after a `feat.` prefix; bytes
/// outside [A-Za-z0-9_-] are written as `.HH` (uppercase hex).
///
/// tsv is a sequence of blocks, one per relational table, in the order AGSET,
/// TIMELINE, SIGNAL, AG, ANCHOR, ANNOTATION, METADATA, FEATURES. Each block is
/// a line `@NAME<TAB>rowcount`, a header row of column names, then the rows.
enum class ExportFormat { aif_lite, tsv };

std::string_view to_string(ExportFormat format);
/// Accepts "aif", "aif-lite", "tsv". Throws UnsupportedFormat otherwise.
ExportFormat parse_export_format(std::string_view name);

/// Writes the AGSet keeping only features whose names are in `fields`.
std::string export_filtered(const AGSet& agset, const std::set<std::string>& fields,
                            ExportFormat format);
std::string export_filtered(const AGSet& agset, const std::set<std::string>& fields,
                            std::string_view format);
/// Writes every feature.
std::string export_agset(const AGSet& agset, ExportFormat format);

AGSet import_agset(std::string_view text, ExportFormat format);
/// Sniffs the format from the first non-blank character ('<' or '@').
AGSet import_agset(std::string_view text);

std::string encode_feature_attribute(std::string_view feature_name);
std::optional<std::string> decode_feature_attribute(std::string_view attribute_name);

}  // namespace agdb
