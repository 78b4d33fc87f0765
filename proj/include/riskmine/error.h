#pragma once

#include <stdexcept>
#include <string>

namespace riskmine {

enum class Errc {
  kInvalidDocument,
  kParse,
  kEmptyTaxonomy,
  kEmptyEntityList,
  kUnknownTerm,
  kNotACandidate,
  kDivisionByZero,
  kEmptyVocabulary,
  kNonFiniteLoss,
  kNoRepresentation,
  kZeroVector,
  kOutOfVocabularyTerm,
  kNoSentences,
  kInsufficientRecords,
  kUnknownPair,
  kEmptyComparison,
  kDomainError,
  kLengthMismatch,
  kEmptyInput,
  kInvalidConfig,
  kIo,
};

const char* errc_name(Errc code);

// All library failures are reported through this exception; callers branch
// on code() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace riskmine
