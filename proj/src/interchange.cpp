#include "agdb/interchange.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <utility>
#include <vector>

#include "agdb/error.hpp"
#include "agdb/schema.hpp"
#include "agdb/tsv.hpp"

namespace agdb {

namespace {

constexpr std::string_view kFeaturePrefix = "feat.";
constexpr std::string_view kFeaturesBlock = "FEATURES";

// ---------------------------------------------------------------------------
// XML writing

std::string xml_escape(std::string_view raw) {
  std::string out;
  for (unsigned char c : raw) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        if (c < 0x20) {
          out += "&#" + std::to_string(c) + ";";
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out;
}

class XmlWriter {
 public:
  void open(std::string_view name, const std::vector<std::pair<std::string, std::string>>& attrs,
            bool self_close) {
    out_ += std::string(depth_ * 2, ' ') + "<" + std::string(name);
    for (const auto& [k, v] : attrs) out_ += " " + k + "=\"" + xml_escape(v) + "\"";
    out_ += self_close ? "/>\n" : ">\n";
    if (!self_close) ++depth_;
  }
  void close(std::string_view name) {
    --depth_;
    out_ += std::string(depth_ * 2, ' ') + "</" + std::string(name) + ">\n";
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  std::size_t depth_ = 0;
};

std::string write_aif(const AGSet& s, const std::set<std::string>& fields) {
  XmlWriter w;
  w.open("AGSet", {{"id", s.id}, {"version", s.version}, {"xmlns", s.xmlns}, {"xlink", s.xlink}},
         false);
  for (const auto& md : s.metadata)
    w.open("Metadata", {{"owner", md.owner_id}, {"name", md.name}, {"value", md.value}}, true);
  for (const auto& tl : s.timelines) {
    w.open("Timeline", {{"id", tl.id}}, tl.signals.empty());
    if (tl.signals.empty()) continue;
    for (const auto& sig : tl.signals)
      w.open("Signal",
             {{"id", sig.id},
              {"mimeClass", sig.mimeclass},
              {"mimeType", sig.mimetype},
              {"encoding", sig.encoding},
              {"unit", sig.unit},
              {"xlinkType", sig.xlinktype},
              {"xlinkHref", sig.xlinkhref},
              {"track", sig.track}},
             true);
    w.close("Timeline");
  }
  for (const auto& ag : s.ags) {
    std::vector<std::pair<std::string, std::string>> attrs{{"id", ag.id}};
    if (ag.timeline_id) attrs.emplace_back("timeline", *ag.timeline_id);
    if (ag.type) attrs.emplace_back("type", *ag.type);
    bool empty = ag.anchors.empty() && ag.annotations.empty();
    w.open("AG", attrs, empty);
    if (empty) continue;
    for (const auto& a : ag.anchors) {
      std::vector<std::pair<std::string, std::string>> aa{{"id", a.id}};
      if (a.offset) aa.emplace_back("offset", tsv::format_double(*a.offset));
      aa.emplace_back("unit", a.unit);
      if (!a.signal_ids.empty()) aa.emplace_back("signals", schema::join_signals(a.signal_ids));
      w.open("Anchor", aa, true);
    }
    for (const auto& ann : ag.annotations) {
      std::vector<std::pair<std::string, std::string>> na{{"id", ann.id},
                                                          {"type", ann.type},
                                                          {"start", ann.start_anchor},
                                                          {"end", ann.end_anchor}};
      for (const auto& [name, value] : ann.features)
        if (fields.count(name)) na.emplace_back(encode_feature_attribute(name), value);
      w.open("Annotation", na, true);
    }
    w.close("AG");
  }
  w.close("AGSet");
  return w.take();
}

// ---------------------------------------------------------------------------
// XML reading (the subset produced above)

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<Element> children;
  std::size_t offset = 0;

  const std::string* attr(std::string_view key) const {
    for (const auto& [k, v] : attrs)
      if (k == key) return &v;
    return nullptr;
  }
  const std::string& required(std::string_view key) const {
    if (const auto* v = attr(key)) return *v;
    throw Error(ErrorCode::MalformedInput,
                "<" + name + "> at offset " + std::to_string(offset) + " lacks attribute " +
                    std::string(key));
  }
  std::string optional_or_empty(std::string_view key) const {
    const auto* v = attr(key);
    return v ? *v : std::string{};
  }
};

class XmlReader {
 public:
  explicit XmlReader(std::string_view text) : text_(text) {}

  Element document() {
    skip_misc();
    Element root = element();
    skip_misc();
    if (pos_ != text_.size()) fail("trailing content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::MalformedInput, "aif-lite: " + what + " at offset " + std::to_string(pos_));
  }

  bool starts_with(std::string_view s) const { return text_.substr(pos_).starts_with(s); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void skip_misc() {
    while (true) {
      skip_ws();
      if (starts_with("<?")) {
        auto end = text_.find("?>", pos_);
        if (end == std::string_view::npos) fail("unterminated processing instruction");
        pos_ = end + 2;
      } else if (starts_with("<!--")) {
        auto end = text_.find("-->", pos_);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 3;
      } else {
        return;
      }
    }
  }

  std::string name() {
    auto start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':')
        ++pos_;
      else
        break;
    }
    if (pos_ == start) fail("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string unescape(std::string_view raw) {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out += raw[i];
        continue;
      }
      auto semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity");
      auto ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out += '&';
      else if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else if (ent.starts_with("#")) {
        unsigned value = 0;
        auto digits = ent.substr(1);
        int base = 10;
        if (digits.starts_with("x")) {
          digits = digits.substr(1);
          base = 16;
        }
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value, base);
        if (ec != std::errc{} || p != digits.data() + digits.size() || value > 0xFF)
          fail("unsupported character reference &" + std::string(ent) + ";");
        out += static_cast<char>(value);
      } else {
        fail("unknown entity &" + std::string(ent) + ";");
      }
      i = semi;
    }
    return out;
  }

  Element element() {
    if (!starts_with("<")) fail("expected '<'");
    Element el;
    el.offset = pos_;
    ++pos_;
    el.name = name();
    while (true) {
      skip_ws();
      if (starts_with("/>")) {
        pos_ += 2;
        return el;
      }
      if (starts_with(">")) {
        ++pos_;
        break;
      }
      auto key = name();
      skip_ws();
      if (!starts_with("=")) fail("expected '=' after attribute " + key);
      ++pos_;
      skip_ws();
      if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\'')) fail("expected quote");
      char quote = text_[pos_++];
      auto end = text_.find(quote, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      el.attrs.emplace_back(std::move(key), unescape(text_.substr(pos_, end - pos_)));
      pos_ = end + 1;
    }
    while (true) {
      skip_misc();
      if (starts_with("</")) {
        pos_ += 2;
        auto closing = name();
        if (closing != el.name) fail("mismatched </" + closing + "> for <" + el.name + ">");
        skip_ws();
        if (!starts_with(">")) fail("expected '>'");
        ++pos_;
        return el;
      }
      if (pos_ >= text_.size()) fail("unterminated <" + el.name + ">");
      if (text_[pos_] != '<') fail("unexpected text content in <" + el.name + ">");
      el.children.push_back(element());
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::optional<double> parse_offset(const Element& el) {
  const auto* v = el.attr("offset");
  if (!v) return std::nullopt;
  auto d = tsv::parse_double(*v);
  if (!d) throw Error(ErrorCode::MalformedInput, "bad offset '" + *v + "'");
  return d;
}

AGSet read_aif(std::string_view text) {
  Element root = XmlReader(text).document();
  if (root.name != "AGSet") throw Error(ErrorCode::MalformedInput, "root element must be <AGSet>");
  AGSet s;
  s.id = root.required("id");
  s.version = root.optional_or_empty("version");
  s.xmlns = root.optional_or_empty("xmlns");
  s.xlink = root.optional_or_empty("xlink");
  for (const auto& child : root.children) {
    if (child.name == "Metadata") {
      s.metadata.push_back(MetadataItem{child.required("owner"), child.required("name"),
                                        child.optional_or_empty("value")});
    } else if (child.name == "Timeline") {
      Timeline tl{child.required("id"), s.id, {}};
      for (const auto& sig : child.children) {
        if (sig.name != "Signal")
          throw Error(ErrorCode::MalformedInput, "unexpected <" + sig.name + "> in <Timeline>");
        tl.signals.push_back(Signal{sig.required("id"), tl.id, sig.optional_or_empty("mimeClass"),
                                    sig.optional_or_empty("mimeType"),
                                    sig.optional_or_empty("encoding"), sig.optional_or_empty("unit"),
                                    sig.optional_or_empty("xlinkType"),
                                    sig.optional_or_empty("xlinkHref"),
                                    sig.optional_or_empty("track")});
      }
      s.timelines.push_back(std::move(tl));
    } else if (child.name == "AG") {
      AG ag;
      ag.id = child.required("id");
      ag.agset_id = s.id;
      if (const auto* t = child.attr("timeline")) ag.timeline_id = *t;
      if (const auto* t = child.attr("type")) ag.type = *t;
      for (const auto& el : child.children) {
        if (el.name == "Anchor") {
          Anchor a;
          a.id = el.required("id");
          a.ag_id = ag.id;
          a.offset = parse_offset(el);
          a.unit = el.optional_or_empty("unit");
          if (const auto* sigs = el.attr("signals")) a.signal_ids = schema::split_signals(*sigs);
          ag.anchors.push_back(std::move(a));
        } else if (el.name == "Annotation") {
          Annotation ann;
          ann.id = el.required("id");
          ann.ag_id = ag.id;
          ann.type = el.optional_or_empty("type");
          ann.start_anchor = el.required("start");
          ann.end_anchor = el.required("end");
          for (const auto& [k, v] : el.attrs)
            if (auto feature = decode_feature_attribute(k)) ann.features.emplace(*feature, v);
          ag.annotations.push_back(std::move(ann));
        } else {
          throw Error(ErrorCode::MalformedInput, "unexpected <" + el.name + "> in <AG>");
        }
      }
      s.ags.push_back(std::move(ag));
    } else {
      throw Error(ErrorCode::MalformedInput, "unexpected <" + child.name + "> in <AGSet>");
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// TSV blocks

constexpr std::string_view kBlockOrder[] = {schema::kAgset,      schema::kTimeline,
                                            schema::kSignal,     schema::kAg,
                                            schema::kAnchor,     schema::kAnnotation,
                                            schema::kMetadata};

std::string write_block(std::string_view name, const tsv::Document& doc) {
  return "@" + std::string(name) + "\t" + std::to_string(doc.rows.size()) + "\n" + tsv::write(doc);
}

std::string write_tsv(const AGSet& s, const std::set<std::string>& fields) {
  std::vector<std::string> columns;
  for (const auto& name : s.feature_names())
    if (fields.count(name)) columns.push_back(name);
  auto rows = schema::to_rows(s, columns);
  std::string out;
  for (auto name : kBlockOrder) out += write_block(name, rows.tables.at(std::string(name)));
  out += write_block(kFeaturesBlock, rows.features);
  return out;
}

AGSet read_tsv(std::string_view text) {
  schema::RowSet rows;
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string_view {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) throw Error(ErrorCode::MalformedInput, "truncated TSV block");
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  bool have_features = false;
  while (pos < text.size()) {
    auto head = next_line();
    if (head.empty()) continue;
    if (head.front() != '@') throw Error(ErrorCode::MalformedInput, "expected block header, got '" + std::string(head) + "'");
    auto tab = head.find('\t');
    if (tab == std::string_view::npos) throw Error(ErrorCode::MalformedInput, "block header lacks row count");
    auto name = head.substr(1, tab - 1);
    std::size_t count = 0;
    auto digits = head.substr(tab + 1);
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), count);
    if (ec != std::errc{} || p != digits.data() + digits.size())
      throw Error(ErrorCode::MalformedInput, "bad row count in block " + std::string(name));
    std::string block{next_line()};
    block += '\n';
    for (std::size_t i = 0; i < count; ++i) {
      block += next_line();
      block += '\n';
    }
    auto doc = tsv::read(block);
    if (name == kFeaturesBlock) {
      rows.features = std::move(doc);
      have_features = true;
    } else if (schema::is_fixed_table(name)) {
      rows.tables[std::string(name)] = std::move(doc);
    } else {
      throw Error(ErrorCode::MalformedInput, "unknown block " + std::string(name));
    }
  }
  if (!have_features) throw Error(ErrorCode::MalformedInput, "missing FEATURES block");
  return schema::from_rows(rows);
}

}  // namespace

std::string_view to_string(ExportFormat format) {
  return format == ExportFormat::aif_lite ? "aif-lite" : "tsv";
}

ExportFormat parse_export_format(std::string_view name) {
  if (name == "aif" || name == "aif-lite") return ExportFormat::aif_lite;
  if (name == "tsv") return ExportFormat::tsv;
  throw Error(ErrorCode::UnsupportedFormat, std::string(name));
}

std::string export_filtered(const AGSet& agset, const std::set<std::string>& fields,
                            ExportFormat format) {
  return format == ExportFormat::aif_lite ? write_aif(agset, fields) : write_tsv(agset, fields);
}

std::string export_filtered(const AGSet& agset, const std::set<std::string>& fields,
                            std::string_view format) {
  return export_filtered(agset, fields, parse_export_format(format));
}

std::string export_agset(const AGSet& agset, ExportFormat format) {
  auto names = agset.feature_names();
  return export_filtered(agset, std::set<std::string>(names.begin(), names.end()), format);
}

AGSet import_agset(std::string_view text, ExportFormat format) {
  return format == ExportFormat::aif_lite ? read_aif(text) : read_tsv(text);
}

AGSet import_agset(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) throw Error(ErrorCode::MalformedInput, "empty document");
  if (text[first] == '<') return read_aif(text);
  if (text[first] == '@') return read_tsv(text);
  throw Error(ErrorCode::UnsupportedFormat, "cannot detect interchange format");
}

std::string encode_feature_attribute(std::string_view feature_name) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out(kFeaturePrefix);
  for (unsigned char c : feature_name) {
    if (std::isalnum(c) || c == '_' || c == '-') {
      out += static_cast<char>(c);
    } else {
      out += '.';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    }
  }
  return out;
}

std::optional<std::string> decode_feature_attribute(std::string_view attribute_name) {
  if (!attribute_name.starts_with(kFeaturePrefix)) return std::nullopt;
  auto body = attribute_name.substr(kFeaturePrefix.size());
  std::string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '.') {
      out += body[i];
      continue;
    }
    if (i + 2 >= body.size())
      throw Error(ErrorCode::MalformedInput, "truncated escape in " + std::string(attribute_name));
    unsigned value = 0;
    auto [p, ec] = std::from_chars(body.data() + i + 1, body.data() + i + 3, value, 16);
    if (ec != std::errc{} || p != body.data() + i + 3)
      throw Error(ErrorCode::MalformedInput, "bad escape in " + std::string(attribute_name));
    out += static_cast<char>(value);
    i += 2;
  }
  return out;
}

}  // namespace agdb
