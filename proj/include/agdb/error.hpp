#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace agdb {

enum class ErrorCode {
  UnknownAnchor,
  DuplicateId,
  CycleDetected,
  InvalidFeatureName,
  UnsupportedFormat,
  MalformedInput,
  MalformedPair,
  UnknownDsn,
  PolicyViolation,
  StorageFailure,
  UnknownAgset,
  VersionConflict,
  UnknownAnnotation,
  LexError,
  ParseError,
  UnboundSelectVariable,
  MissingOffsets,
  MissingIndex,
  UnknownCorpus,
  UnknownFeature,
  OracleMismatch,
  Timeout,
  ClosedHandle,
};

std::string_view to_string(ErrorCode code);

/// Module name that owns the error code ("core-model", "relstore", ...).
std::string_view module_of(ErrorCode code);

/// Base exception for every failure surfaced by the library. The message is
/// prefixed with the owning module and the error name, e.g.
/// "relstore: VersionConflict: expected 7, current 8".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Lexer and parser failures carry the byte offset into the query text and,
/// for parse errors, the set of tokens that would have been accepted.
class QueryError : public Error {
 public:
  QueryError(ErrorCode code, std::size_t position, const std::string& detail,
             std::string expected = {});

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

}  // namespace agdb
