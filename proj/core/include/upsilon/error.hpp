#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace upsilon {

// Domain error codes. The string form (to_string) is the stable,
// machine-parseable name printed by the CLI and returned by the HTTP API.
enum class ErrorCode {
  // ingest
  MalformedXml,
  UnknownElement,
  UndeclaredVariable,
  DuplicateEquationId,
  DuplicateVariable,
  ReservedSymbol,
  InvalidDescriptor,
  // causal
  NoPerfectMatching,
  RoleConflict,
  // synthesis / relstore
  EmptyFdSet,
  DuplicateRelation,
  KeyViolation,
  UnknownSymbol,
  UnknownRelation,
  UnknownAttribute,
  MalformedCsv,
  // uncertain
  NonPositiveWeight,
  NoTrials,
  UnfactorizedTrial,
  DuplicateTrial,
  UnknownAssignment,
  // conditioning
  NonPositiveSigma,
  MissingPrediction,
  EmptyObservationSet,
  NotUIntroduced,
  // simkit
  NonFiniteState,
  InvalidModel,
  // project / service
  UnknownPhenomenon,
  UnknownHypothesis,
  DuplicatePhenomenon,
  DuplicateHypothesis,
  StageViolation,
  ProjectNotInitialized,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace upsilon
