#ifndef UAML_ERROR_HPP_
#define UAML_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace uaml {

enum class ErrorCode {
  kDomainTooSmall,
  kInvalidCounts,
  kInvalidOpinion,
  kInvalidLevel,
  kInvalidLabel,
  kMalformedRecord,
  kMalformedNetwork,
  kUnsupportedStructure,
  kInconsistentEvidence,
  kInvalidEvidence,
  kTooLarge,
  kTrainingDiverged,
  kSyntax,
  kUnstratified,
  kInvalidProbability,
  kUnknownFact,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// Base exception for every failure raised by the toolkit.  The code is
// stable and machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parse failure with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, const std::string& message, int line, int column)
      : Error(code, std::to_string(line) + ":" + std::to_string(column) + ": " +
                        message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace uaml

#endif  // UAML_ERROR_HPP_
