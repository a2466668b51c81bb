#include "uaml/error.hpp"

namespace uaml {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDomainTooSmall: return "domain-too-small";
    case ErrorCode::kInvalidCounts: return "invalid-counts";
    case ErrorCode::kInvalidOpinion: return "invalid-opinion";
    case ErrorCode::kInvalidLevel: return "invalid-level";
    case ErrorCode::kInvalidLabel: return "invalid-label";
    case ErrorCode::kMalformedRecord: return "malformed-record";
    case ErrorCode::kMalformedNetwork: return "malformed-network";
    case ErrorCode::kUnsupportedStructure: return "unsupported-structure";
    case ErrorCode::kInconsistentEvidence: return "inconsistent-evidence";
    case ErrorCode::kInvalidEvidence: return "invalid-evidence";
    case ErrorCode::kTooLarge: return "too-large";
    case ErrorCode::kTrainingDiverged: return "training-diverged";
    case ErrorCode::kSyntax: return "syntax-error";
    case ErrorCode::kUnstratified: return "unstratified-program";
    case ErrorCode::kInvalidProbability: return "invalid-probability";
    case ErrorCode::kUnknownFact: return "unknown-fact";
    case ErrorCode::kIo: return "io-error";
  }
  return "unknown";
}

}  // namespace uaml
