#include "upsilon/error.hpp"

namespace upsilon {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::UnknownElement: return "UnknownElement";
    case ErrorCode::UndeclaredVariable: return "UndeclaredVariable";
    case ErrorCode::DuplicateEquationId: return "DuplicateEquationId";
    case ErrorCode::DuplicateVariable: return "DuplicateVariable";
    case ErrorCode::ReservedSymbol: return "ReservedSymbol";
    case ErrorCode::InvalidDescriptor: return "InvalidDescriptor";
    case ErrorCode::NoPerfectMatching: return "NoPerfectMatching";
    case ErrorCode::RoleConflict: return "RoleConflict";
    case ErrorCode::EmptyFdSet: return "EmptyFdSet";
    case ErrorCode::DuplicateRelation: return "DuplicateRelation";
    case ErrorCode::KeyViolation: return "KeyViolation";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::UnknownRelation: return "UnknownRelation";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::NoTrials: return "NoTrials";
    case ErrorCode::UnfactorizedTrial: return "UnfactorizedTrial";
    case ErrorCode::DuplicateTrial: return "DuplicateTrial";
    case ErrorCode::UnknownAssignment: return "UnknownAssignment";
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::MissingPrediction: return "MissingPrediction";
    case ErrorCode::EmptyObservationSet: return "EmptyObservationSet";
    case ErrorCode::NotUIntroduced: return "NotUIntroduced";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::UnknownPhenomenon: return "UnknownPhenomenon";
    case ErrorCode::UnknownHypothesis: return "UnknownHypothesis";
    case ErrorCode::DuplicatePhenomenon: return "DuplicatePhenomenon";
    case ErrorCode::DuplicateHypothesis: return "DuplicateHypothesis";
    case ErrorCode::StageViolation: return "StageViolation";
    case ErrorCode::ProjectNotInitialized: return "ProjectNotInitialized";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace upsilon
