#include "agdb/error.hpp"

namespace agdb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownAnchor: return "UnknownAnchor";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::InvalidFeatureName: return "InvalidFeatureName";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::MalformedPair: return "MalformedPair";
    case ErrorCode::UnknownDsn: return "UnknownDsn";
    case ErrorCode::PolicyViolation: return "PolicyViolation";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::UnknownAgset: return "UnknownAgset";
    case ErrorCode::VersionConflict: return "VersionConflict";
    case ErrorCode::UnknownAnnotation: return "UnknownAnnotation";
    case ErrorCode::LexError: return "LexError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnboundSelectVariable: return "UnboundSelectVariable";
    case ErrorCode::MissingOffsets: return "MissingOffsets";
    case ErrorCode::MissingIndex: return "MissingIndex";
    case ErrorCode::UnknownCorpus: return "UnknownCorpus";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::OracleMismatch: return "OracleMismatch";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ClosedHandle: return "ClosedHandle";
  }
  return "Unknown";
}

std::string_view module_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownAnchor:
    case ErrorCode::DuplicateId:
    case ErrorCode::CycleDetected:
    case ErrorCode::InvalidFeatureName:
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::MalformedInput:
      return "core-model";
    case ErrorCode::MalformedPair:
    case ErrorCode::UnknownDsn:
    case ErrorCode::PolicyViolation:
    case ErrorCode::StorageFailure:
    case ErrorCode::UnknownAgset:
    case ErrorCode::VersionConflict:
    case ErrorCode::UnknownAnnotation:
      return "relstore";
    case ErrorCode::LexError:
    case ErrorCode::ParseError:
    case ErrorCode::UnboundSelectVariable:
      return "agql";
    case ErrorCode::MissingOffsets:
      return "closure-index";
    case ErrorCode::MissingIndex:
    case ErrorCode::UnknownCorpus:
    case ErrorCode::UnknownFeature:
    case ErrorCode::Timeout:
      return "query-engine";
    case ErrorCode::OracleMismatch:
      return "bench";
    case ErrorCode::ClosedHandle:
      return "script-bindings";
  }
  return "agdb";
}

namespace {

std::string compose(ErrorCode code, const std::string& detail) {
  std::string msg{module_of(code)};
  msg += ": ";
  msg += to_string(code);
  if (!detail.empty()) {
    msg += ": ";
    msg += detail;
  }
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(compose(code, detail)), code_(code), detail_(detail) {}

QueryError::QueryError(ErrorCode code, std::size_t position,
                       const std::string& detail, std::string expected)
    : Error(code, detail + " at offset " + std::to_string(position) +
                      (expected.empty() ? "" : " (expected " + expected + ")")),
      position_(position),
      expected_(std::move(expected)) {}

}  // namespace agdb
