#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Tab-separated text shared by the embedded store and the TSV interchange
// format. Rows are newline-terminated; tab, newline, carriage return and
// backslash inside a cell are written as \t \n \r \\. A NULL cell is \N.
namespace agdb::tsv {

using Cell = std::optional<std::string>;
using Row = std::vector<Cell>;

std::string escape(std::string_view raw);
std::string unescape(std::string_view escaped);

std::string encode_cell(const Cell& cell);
Cell decode_cell(std::string_view field);

/// Encodes one row, including the trailing newline.
std::string format_row(const Row& row);
/// Decodes one line (without its newline).
Row parse_row(std::string_view line);

struct Document {
  std::vector<std::string> header;
  std::vector<Row> rows;

  bool operator==(const Document&) const = default;
};

std::string write(const Document& doc);
/// Parses a header row followed by data rows. Every row must have the header's
/// width; otherwise MalformedInput.
Document read(std::string_view text);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
std::optional<double> parse_double(std::string_view text);

}  // namespace agdb::tsv
