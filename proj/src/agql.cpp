#include "agdb/agql.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "agdb/error.hpp"

namespace agdb::agql {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Select: return "SELECT";
    case TokenKind::Where: return "WHERE";
    case TokenKind::And: return "AND";
    case TokenKind::Ident: return "identifier";
    case TokenKind::String: return "string";
    case TokenKind::Dot: return "'.'";
    case TokenKind::LBracket: return "'['";
    case TokenKind::RBracket: return "']'";
    case TokenKind::Star: return "'*'";
    case TokenKind::Colon: return "':'";
    case TokenKind::Comma: return "','";
    case TokenKind::Arrow: return "'<-'";
    case TokenKind::Slash: return "'/'";
    case TokenKind::Semi: return "';'";
    case TokenKind::End: return "end of input";
  }
  return "?";
}

namespace {

bool is_name_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c >= 0x80;
}

bool is_keyword(std::string_view s) { return s == "SELECT" || s == "WHERE" || s == "AND"; }

// A value that lexes back to a single identifier token.
bool is_bare_name(std::string_view s) {
  return !s.empty() && !is_keyword(s) &&
         std::all_of(s.begin(), s.end(), [](char c) { return is_name_byte(static_cast<unsigned char>(c)); });
}

}  // namespace

bool is_variable_name(std::string_view name) {
  return !name.empty() && name.front() >= 'A' && name.front() <= 'Z';
}

std::vector<Token> tokenize(std::string_view input) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto single = [&](TokenKind kind) {
    out.push_back({kind, std::string(1, input[i]), i});
    ++i;
  };
  while (i < input.size()) {
    auto c = static_cast<unsigned char>(input[i]);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      ++i;
      continue;
    }
    switch (c) {
      case '.': single(TokenKind::Dot); continue;
      case '[': single(TokenKind::LBracket); continue;
      case ']': single(TokenKind::RBracket); continue;
      case '*': single(TokenKind::Star); continue;
      case ':': single(TokenKind::Colon); continue;
      case ',': single(TokenKind::Comma); continue;
      case '/': single(TokenKind::Slash); continue;
      case ';': single(TokenKind::Semi); continue;
      default: break;
    }
    if (c == '<') {
      if (i + 1 < input.size() && input[i + 1] == '-') {
        out.push_back({TokenKind::Arrow, "<-", i});
        i += 2;
        continue;
      }
      throw QueryError(ErrorCode::LexError, i, "'<' must start '<-'");
    }
    if (c == '\'' || c == '"') {
      auto start = i++;
      std::string text;
      bool closed = false;
      while (i < input.size()) {
        char d = input[i++];
        if (d == static_cast<char>(c)) {
          closed = true;
          break;
        }
        if (d == '\\') {
          if (i >= input.size()) break;
          d = input[i++];
        }
        text += d;
      }
      if (!closed) throw QueryError(ErrorCode::LexError, start, "unterminated string literal");
      out.push_back({TokenKind::String, std::move(text), start});
      continue;
    }
    if (is_name_byte(c)) {
      auto start = i;
      while (i < input.size() && is_name_byte(static_cast<unsigned char>(input[i]))) ++i;
      std::string text(input.substr(start, i - start));
      TokenKind kind = TokenKind::Ident;
      if (text == "SELECT") kind = TokenKind::Select;
      else if (text == "WHERE") kind = TokenKind::Where;
      else if (text == "AND") kind = TokenKind::And;
      out.push_back({kind, std::move(text), start});
      continue;
    }
    throw QueryError(ErrorCode::LexError, i, std::string("illegal character '") + input[i] + "'");
  }
  out.push_back({TokenKind::End, "", input.size()});
  return out;
}

namespace {

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : tokens_(tokens) {
    if (tokens_.empty() || tokens_.back().kind != TokenKind::End)
      throw QueryError(ErrorCode::ParseError, 0, "token list must end with End");
  }

  QueryAst query() {
    QueryAst ast;
    expect(TokenKind::Select, "SELECT");
    std::vector<const Token*> selected;
    selected.push_back(&variable("select variable"));
    while (peek().kind == TokenKind::Comma) {
      advance();
      selected.push_back(&variable("select variable"));
    }
    expect(TokenKind::Where, "',' or WHERE");
    ast.clauses.push_back(clause());
    while (peek().kind == TokenKind::And) {
      advance();
      ast.clauses.push_back(clause());
    }
    expect(TokenKind::Semi, "AND or ';'");
    expect(TokenKind::End, "end of input");

    for (const auto* tok : selected) {
      if (!uses_.count(tok->text))
        throw QueryError(ErrorCode::UnboundSelectVariable, tok->offset,
                         "variable " + tok->text + " is not bound by any clause");
      ast.select_vars.push_back(tok->text);
    }
    return ast;
  }

 private:
  enum class Use { anchor, id };

  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() {
    const auto& t = tokens_[pos_];
    if (t.kind != TokenKind::End) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    const auto& t = peek();
    auto where = t.offset;
    // End-of-input errors point at the last real token.
    if (t.kind == TokenKind::End && pos_ > 0) where = tokens_[pos_ - 1].offset;
    std::string found = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
    throw QueryError(ErrorCode::ParseError, where, "expected " + expected + ", found " + found, expected);
  }

  const Token& expect(TokenKind kind, const std::string& expected) {
    if (peek().kind != kind) fail(expected);
    return advance();
  }

  const Token& variable(const std::string& what) {
    if (peek().kind != TokenKind::Ident || !is_variable_name(peek().text)) fail(what);
    return advance();
  }

  void record(const Token& tok, Use use) {
    auto [it, fresh] = uses_.emplace(tok.text, use);
    if (!fresh && it->second != use)
      throw QueryError(ErrorCode::ParseError, tok.offset,
                       "variable " + tok.text + " is used both as an anchor and as an id");
  }

  std::string value() {
    const auto& t = peek();
    if (t.kind == TokenKind::Ident || t.kind == TokenKind::String) return advance().text;
    fail("value");
  }

  Constraint constraint() {
    if (peek().kind == TokenKind::Colon) {
      advance();
      return LabelEq{value()};
    }
    if (peek().kind != TokenKind::Ident || is_variable_name(peek().text)) fail("feature name or ':'");
    auto field = advance().text;
    expect(TokenKind::Colon, "':'");
    if (field == "id") {
      const auto& var = variable("id variable");
      record(var, Use::id);
      return IdBind{var.text};
    }
    return FeatureEq{std::move(field), value()};
  }

  Arc arc() {
    expect(TokenKind::LBracket, "'['");
    Arc a;
    if (peek().kind != TokenKind::RBracket) {
      a.constraints.push_back(constraint());
      while (peek().kind == TokenKind::Comma) {
        advance();
        a.constraints.push_back(constraint());
      }
    }
    expect(TokenKind::RBracket, "',' or ']'");
    if (peek().kind == TokenKind::Star) {
      if (!a.constraints.empty())
        throw QueryError(ErrorCode::ParseError, peek().offset,
                         "a starred arc cannot carry constraints", "'.'");
      advance();
      a.starred = true;
    }
    return a;
  }

  Clause clause() {
    Clause c;
    const auto& first = variable("anchor variable");
    record(first, Use::anchor);
    c.path.push_back(Variable{first.text});
    do {
      expect(TokenKind::Dot, c.path.size() == 1 ? "'.'" : "'.' or '<-'");
      if (peek().kind == TokenKind::LBracket) {
        c.path.push_back(arc());
      } else {
        const auto& var = variable("'[' or anchor variable");
        if (std::holds_alternative<Variable>(c.path.back()))
          throw QueryError(ErrorCode::ParseError, var.offset,
                           "two anchor variables cannot be adjacent", "'['");
        record(var, Use::anchor);
        c.path.push_back(Variable{var.text});
      }
    } while (peek().kind != TokenKind::Arrow);
    if (!std::holds_alternative<Variable>(c.path.back())) fail("'.'");
    advance();
    c.database = expect(TokenKind::Ident, "database name").text;
    expect(TokenKind::Slash, "'/'");
    c.type = expect(TokenKind::Ident, "annotation type").text;
    return c;
  }

  const std::vector<Token>& tokens_;
  std::size_t pos_ = 0;
  std::map<std::string, Use> uses_;
};

std::string print_value(const std::string& v) {
  if (is_bare_name(v)) return v;
  std::string out = "'";
  for (char c : v) {
    if (c == '\'' || c == '\\') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

}  // namespace

QueryAst parse(const std::vector<Token>& tokens) { return Parser(tokens).query(); }

QueryAst parse(std::string_view input) { return parse(tokenize(input)); }

std::string pretty_print(const QueryAst& ast) {
  std::string out = "SELECT ";
  for (std::size_t i = 0; i < ast.select_vars.size(); ++i) {
    if (i) out += ", ";
    out += ast.select_vars[i];
  }
  out += " WHERE ";
  for (std::size_t c = 0; c < ast.clauses.size(); ++c) {
    if (c) out += " AND ";
    const auto& clause = ast.clauses[c];
    for (std::size_t e = 0; e < clause.path.size(); ++e) {
      if (e) out += '.';
      if (const auto* v = std::get_if<Variable>(&clause.path[e])) {
        out += v->name;
        continue;
      }
      const auto& arc = std::get<Arc>(clause.path[e]);
      out += '[';
      for (std::size_t k = 0; k < arc.constraints.size(); ++k) {
        if (k) out += ',';
        std::visit(
            [&](const auto& con) {
              using T = std::decay_t<decltype(con)>;
              if constexpr (std::is_same_v<T, FeatureEq>)
                out += con.field + ":" + print_value(con.value);
              else if constexpr (std::is_same_v<T, LabelEq>)
                out += ":" + print_value(con.value);
              else
                out += "id:" + con.var;
            },
            arc.constraints[k]);
      }
      out += ']';
      if (arc.starred) out += '*';
    }
    out += " <- " + clause.database + "/" + clause.type;
  }
  out += ';';
  return out;
}

std::vector<std::string> anchor_variables(const QueryAst& ast) {
  std::vector<std::string> out;
  for (const auto& c : ast.clauses)
    for (const auto& e : c.path)
      if (const auto* v = std::get_if<Variable>(&e))
        if (std::find(out.begin(), out.end(), v->name) == out.end()) out.push_back(v->name);
  return out;
}

std::vector<std::string> id_variables(const QueryAst& ast) {
  std::vector<std::string> out;
  for (const auto& c : ast.clauses)
    for (const auto& e : c.path)
      if (const auto* a = std::get_if<Arc>(&e))
        for (const auto& con : a->constraints)
          if (const auto* id = std::get_if<IdBind>(&con))
            if (std::find(out.begin(), out.end(), id->var) == out.end()) out.push_back(id->var);
  return out;
}

}  // namespace agdb::agql
