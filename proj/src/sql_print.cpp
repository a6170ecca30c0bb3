#include <algorithm>
#include <cctype>

#include "agdb/plan.hpp"
#include "agdb/schema.hpp"

namespace agdb {

namespace {

std::string quote(std::string_view value) {
  std::string out = "'";
  for (char c : value) {
    if (c == '\'') out += '\'';
    out += c;
  }
  out += '\'';
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string ref(const Plan& plan, const ColumnRef& r) {
  return plan.sources[r.source].alias + "." + std::string(column_name(r.column));
}

constexpr std::string_view kIndent = "       ";

std::string select_list(const Source& src, bool qualify_id) {
  std::string out;
  for (std::size_t i = 0; i < src.columns.size(); ++i) {
    if (i) out += ", ";
    if (qualify_id && src.columns[i] == Col::annotation_id) out += "A.";
    out += column_name(src.columns[i]);
  }
  return out;
}

std::string subquery(const Source& src) {
  std::string out = "(SELECT ";
  switch (src.role) {
    case SourceRole::word_arc:
      out += select_list(src, false);
      out += "\n" + std::string(kIndent) + "FROM   Annotation\n" + std::string(kIndent) +
             "WHERE  Type=" + quote(src.type);
      if (src.agset) out += " AND\n" + std::string(kIndent) + "       AGSetId=" + quote(*src.agset);
      break;
    case SourceRole::constrained_arc: {
      out += select_list(src, true);
      out += "\n" + std::string(kIndent) + "FROM   Annotation A, " + schema::sql_identifier(src.corpus) + " F\n" +
             std::string(kIndent) + "WHERE  A.Type=" + quote(src.type) + " AND\n" + std::string(kIndent) +
             "       A.AnnotationId=F.annotationId";
      if (src.agset) out += " AND\n" + std::string(kIndent) + "       A.AGSetId=" + quote(*src.agset);
      for (const auto& f : src.filters)
        out += " AND\n" + std::string(kIndent) + "       F." + schema::sql_identifier(f.column) + "=" + quote(f.value);
      break;
    }
    case SourceRole::kstar_ref:
      out += select_list(src, false);
      out += "\n" + std::string(kIndent) + "FROM   Kstar\n" + std::string(kIndent) + "WHERE  Type=" + quote(src.type);
      break;
    case SourceRole::kstar_array_ref:
      out += select_list(src, false);
      out += "\n" + std::string(kIndent) + "FROM   Kstar_array\n" + std::string(kIndent) +
             "WHERE  Type=" + quote(src.type);
      break;
    case SourceRole::anchor_ref:
      out += select_list(src, false);
      out += "\n" + std::string(kIndent) + "FROM   Anchor";
      break;
  }
  out += ") AS " + src.alias;
  return out;
}

}  // namespace

std::string print_sql(const Plan& plan) {
  std::string out = "SELECT ";
  if (plan.projection.empty()) out += "*";
  for (std::size_t i = 0; i < plan.projection.size(); ++i) {
    if (i) out += ", ";
    const auto& r = plan.projection[i].column;
    out += plan.sources[r.source].alias + "." + lower(column_name(r.column));
  }
  out += "\n\n";
  for (std::size_t s = 0; s < plan.sources.size(); ++s) {
    out += s == 0 ? "FROM  " : "      ";
    out += subquery(plan.sources[s]);
    out += s + 1 < plan.sources.size() ? ",\n\n" : "\n\n";
  }
  for (std::size_t p = 0; p < plan.predicates.size(); ++p) {
    const auto& pred = plan.predicates[p];
    out += p == 0 ? "WHERE  " : "       ";
    if (pred.kind == PredicateKind::cell)
      out += plan.sources[pred.matrix].alias + ".A[anchor_num(" + ref(plan, pred.lhs) + ")][anchor_num(" +
             ref(plan, pred.rhs) + ")]";
    else
      out += ref(plan, pred.lhs) + "=" + ref(plan, pred.rhs);
    out += p + 1 < plan.predicates.size() ? " AND\n" : "\n";
  }
  out += ";\n";
  return out;
}

std::string plan_to_text(const Plan& plan) {
  std::string out = "mode " + std::string(to_string(plan.mode)) + "\n";
  if (plan.domain) out += "domain " + *plan.domain + "\n";
  for (const auto& src : plan.sources) {
    out += "source " + src.alias + " " + std::string(to_string(src.role)) + " clause=" +
           std::to_string(src.clause + 1) + " type=" + src.type;
    if (src.agset) out += " agset=" + *src.agset;
    if (src.role == SourceRole::constrained_arc) out += " corpus=" + src.corpus;
    for (const auto& f : src.filters) out += " " + f.column + "=" + quote(f.value);
    out += " columns=";
    for (std::size_t i = 0; i < src.columns.size(); ++i) {
      if (i) out += ",";
      out += column_name(src.columns[i]);
    }
    out += "\n";
  }
  for (const auto& pred : plan.predicates) {
    out += "predicate " + std::string(to_string(pred.kind)) + " ";
    if (pred.kind == PredicateKind::cell) out += plan.sources[pred.matrix].alias + " ";
    out += ref(plan, pred.lhs) + " " + ref(plan, pred.rhs) + "\n";
  }
  for (const auto& o : plan.projection) out += "output " + o.variable + " " + ref(plan, o.column) + "\n";
  out += "join";
  for (auto s : plan.join_order) out += " " + plan.sources[s].alias;
  out += "\ndistinct " + std::string(plan.distinct ? "true" : "false") + "\n";
  return out;
}

}  // namespace agdb
