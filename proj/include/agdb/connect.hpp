#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace agdb {

enum class Backend { embedded, sql_emit };

/// Connect-string fields. Unset fields stay empty optionals until
/// resolve_config fills them from the DSN's config section.
struct ConnectSpec {
  std::optional<std::string> dsn;
  std::optional<std::string> server;
  std::optional<std::string> uid;
  std::optional<std::string> pwd;
  std::optional<std::string> database;
  std::optional<Backend> backend;
  /// Keys not listed above, upper-cased.
  std::map<std::string, std::string> extras;

  bool operator==(const ConnectSpec&) const = default;
};

/// Splits "KEY=value;KEY=value;" into a spec. Keys are case-insensitive;
/// empty segments are skipped. Throws MalformedPair for a segment without '='.
ConnectSpec parse_connect_string(std::string_view text);

/// INI sections as written in an iODBC/unixODBC .odbc.ini file.
using IniFile = std::map<std::string, std::map<std::string, std::string>>;
IniFile parse_ini(std::string_view text);

/// Fills missing fields from the section named by spec.dsn. Values from the
/// connect string win over the config file; USER maps to uid and PASSWORD to
/// pwd; DATABASE defaults to the DSN name. Throws UnknownDsn when the DSN
/// names no section and the connect string does not give DATABASE itself.
ConnectSpec resolve_config(const ConnectSpec& spec, std::string_view config_text);

/// Location of the config file: $AG_ODBC_INI, else ~/.odbc.ini.
std::filesystem::path default_config_path();

/// Resolves a connect string (or a bare DSN name) against the config file
/// and returns the root directory of the embedded store. Relative DATABASE
/// paths are interpreted relative to the config file's directory.
struct ResolvedConnection {
  ConnectSpec spec;
  std::filesystem::path root;
};
ResolvedConnection resolve_connection(std::string_view connect_or_dsn,
                                      const std::optional<std::filesystem::path>& config = {});

}  // namespace agdb
