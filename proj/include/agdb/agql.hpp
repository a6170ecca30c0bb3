#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Lexer, parser and printer for the annotation-graph path query language:
//
//   query      := "SELECT" var ("," var)* "WHERE" clause ("AND" clause)* ";"
//   clause     := var ("." element)* "." var "<-" name "/" name
//   element    := var | arc
//   arc        := "[" constraint? ("," constraint)* "]" "*"?
//   constraint := ident ":" value | ":" value
//   value      := ident | var | string
//
// Variables start with an uppercase letter, idents with anything else.
namespace agdb::agql {

enum class TokenKind {
  Select,
  Where,
  And,
  Ident,
  String,
  Dot,
  LBracket,
  RBracket,
  Star,
  Colon,
  Comma,
  Arrow,
  Slash,
  Semi,
  End,
};

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind;
  std::string text;     // identifier name or decoded string literal
  std::size_t offset;   // byte offset into the query text

  bool operator==(const Token&) const = default;
};

bool is_variable_name(std::string_view name);

/// Throws LexError at the offset of the first illegal character. The result
/// always ends with an End token.
std::vector<Token> tokenize(std::string_view input);

struct Variable {
  std::string name;
  bool operator==(const Variable&) const = default;
};

/// `field:value`
struct FeatureEq {
  std::string field;
  std::string value;
  bool operator==(const FeatureEq&) const = default;
};

/// `:value`, shorthand for `label:value`
struct LabelEq {
  std::string value;
  bool operator==(const LabelEq&) const = default;
};

/// `id:Var`
struct IdBind {
  std::string var;
  bool operator==(const IdBind&) const = default;
};

using Constraint = std::variant<FeatureEq, LabelEq, IdBind>;

struct Arc {
  std::vector<Constraint> constraints;
  bool starred = false;
  bool operator==(const Arc&) const = default;
};

using PathElement = std::variant<Variable, Arc>;

struct Clause {
  std::vector<PathElement> path;
  std::string database;
  std::string type;
  bool operator==(const Clause&) const = default;
};

struct QueryAst {
  std::vector<std::string> select_vars;
  std::vector<Clause> clauses;
  bool operator==(const QueryAst&) const = default;
};

inline constexpr std::string_view kLabelFeature = "label";
inline constexpr std::string_view kDefaultDatabase = "db";

/// Throws ParseError (with position and expected tokens) or
/// UnboundSelectVariable.
QueryAst parse(const std::vector<Token>& tokens);
QueryAst parse(std::string_view input);

/// Surface syntax that parses back to the same AST.
std::string pretty_print(const QueryAst& ast);

/// Distinct anchor variables and id variables of a query, in first-use order.
std::vector<std::string> anchor_variables(const QueryAst& ast);
std::vector<std::string> id_variables(const QueryAst& ast);

}  // namespace agdb::agql
