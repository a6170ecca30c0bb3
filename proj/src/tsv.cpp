#include "agdb/tsv.hpp"

#include <charconv>

#include "agdb/error.hpp"

namespace agdb::tsv {

std::string escape(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view escaped) {
  std::string out;
  out.reserve(escaped.size());
  for (std::size_t i = 0; i < escaped.size(); ++i) {
    char c = escaped[i];
    if (c != '\\') {
      out += c;
      continue;
    }
    if (++i == escaped.size()) throw Error(ErrorCode::MalformedInput, "dangling backslash in TSV cell");
    switch (escaped[i]) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case '\\': out += '\\'; break;
      default:
        throw Error(ErrorCode::MalformedInput,
                    std::string("unknown TSV escape \\") + escaped[i]);
    }
  }
  return out;
}

std::string encode_cell(const Cell& cell) { return cell ? escape(*cell) : std::string("\\N"); }

Cell decode_cell(std::string_view field) {
  if (field == "\\N") return std::nullopt;
  return unescape(field);
}

std::string format_row(const Row& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += '\t';
    out += encode_cell(row[i]);
  }
  out += '\n';
  return out;
}

Row parse_row(std::string_view line) {
  Row row;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    row.push_back(decode_cell(line.substr(start, tab == std::string_view::npos ? tab : tab - start)));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return row;
}

std::string write(const Document& doc) {
  Row header(doc.header.begin(), doc.header.end());
  std::string out = format_row(header);
  for (const auto& row : doc.rows) out += format_row(row);
  return out;
}

Document read(std::string_view text) {
  Document doc;
  bool first = true;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos)
      throw Error(ErrorCode::MalformedInput, "TSV row " + std::to_string(line_no + 1) +
                                                 " is not newline-terminated");
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    auto row = parse_row(line);
    if (first) {
      for (auto& cell : row) {
        if (!cell) throw Error(ErrorCode::MalformedInput, "NULL in TSV header");
        doc.header.push_back(std::move(*cell));
      }
      first = false;
      continue;
    }
    if (row.size() != doc.header.size())
      throw Error(ErrorCode::MalformedInput,
                  "TSV row " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                      " cells, header has " + std::to_string(doc.header.size()));
    doc.rows.push_back(std::move(row));
  }
  return doc;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::optional<double> parse_double(std::string_view text) {
  double value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace agdb::tsv
