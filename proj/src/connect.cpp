#include "agdb/connect.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "agdb/error.hpp"

namespace agdb {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Backend parse_backend(std::string_view value) {
  auto v = upper(value);
  if (v == "EMBEDDED") return Backend::embedded;
  if (v == "SQL-EMIT" || v == "SQL_EMIT") return Backend::sql_emit;
  throw Error(ErrorCode::MalformedPair, "unknown BACKEND '" + std::string(value) + "'");
}

void assign(ConnectSpec& spec, const std::string& key, std::string value, bool overwrite) {
  auto set = [&](std::optional<std::string>& field) {
    if (overwrite || !field) field = std::move(value);
  };
  if (key == "DSN") set(spec.dsn);
  else if (key == "SERVER") set(spec.server);
  else if (key == "UID" || key == "USER") set(spec.uid);
  else if (key == "PWD" || key == "PASSWORD") set(spec.pwd);
  else if (key == "DATABASE") set(spec.database);
  else if (key == "BACKEND") {
    if (overwrite || !spec.backend) spec.backend = parse_backend(value);
  } else if (overwrite || !spec.extras.count(key)) {
    spec.extras[key] = std::move(value);
  }
}

}  // namespace

ConnectSpec parse_connect_string(std::string_view text) {
  ConnectSpec spec;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto semi = text.find(';', start);
    auto segment = trim(text.substr(start, semi == std::string_view::npos ? semi : semi - start));
    if (!segment.empty()) {
      auto eq = segment.find('=');
      if (eq == std::string_view::npos)
        throw Error(ErrorCode::MalformedPair, "segment '" + std::string(segment) + "' has no '='");
      assign(spec, upper(trim(segment.substr(0, eq))), std::string(trim(segment.substr(eq + 1))),
             true);
    }
    if (semi == std::string_view::npos) break;
    start = semi + 1;
  }
  return spec;
}

IniFile parse_ini(std::string_view text) {
  IniFile ini;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    auto line = trim(raw);
    if (line.empty() || line.front() == ';' || line.front() == '#') continue;
    if (line.front() == '[') {
      auto close = line.find(']');
      section = std::string(trim(line.substr(1, close == std::string_view::npos ? close : close - 1)));
      ini[section];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    ini[section][upper(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
  }
  return ini;
}

ConnectSpec resolve_config(const ConnectSpec& spec, std::string_view config_text) {
  ConnectSpec out = spec;
  if (!out.dsn || out.dsn->empty())
    throw Error(ErrorCode::UnknownDsn, "connect string names no DSN");
  auto ini = parse_ini(config_text);
  auto section = ini.find(*out.dsn);
  if (section == ini.end()) {
    if (!out.database)
      throw Error(ErrorCode::UnknownDsn, "no section [" + *out.dsn + "] and no DATABASE given");
  } else {
    for (const auto& [key, value] : section->second) {
      if (key == "DSN") continue;
      assign(out, key, value, false);
    }
  }
  if (!out.database) out.database = out.dsn;
  if (!out.backend) out.backend = Backend::embedded;
  return out;
}

std::filesystem::path default_config_path() {
  if (const char* env = std::getenv("AG_ODBC_INI"); env && *env) return env;
  if (const char* home = std::getenv("HOME"); home && *home)
    return std::filesystem::path(home) / ".odbc.ini";
  return ".odbc.ini";
}

ResolvedConnection resolve_connection(std::string_view connect_or_dsn,
                                      const std::optional<std::filesystem::path>& config) {
  ConnectSpec spec;
  if (connect_or_dsn.find('=') == std::string_view::npos)
    spec.dsn = std::string(trim(connect_or_dsn));
  else
    spec = parse_connect_string(connect_or_dsn);
  auto path = config.value_or(default_config_path());
  std::string text;
  if (std::ifstream in{path}) {
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  ResolvedConnection out{resolve_config(spec, text), {}};
  std::filesystem::path root = *out.spec.database;
  if (root.is_relative()) root = path.parent_path() / root;
  out.root = root;
  return out;
}

}  // namespace agdb
