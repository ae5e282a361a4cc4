#pragma once

#include <stdexcept>
#include <string>

namespace groupblame {

// Base of every error the library throws. `code()` is a stable identifier
// that the CLI prints next to the message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define GROUPBLAME_DEFINE_ERROR(Name, Code)                              \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& message) : Error(Code, message) {} \
  }

GROUPBLAME_DEFINE_ERROR(EvaluationError, "evaluation_error");
GROUPBLAME_DEFINE_ERROR(EquationRangeError, "equation_range_error");
GROUPBLAME_DEFINE_ERROR(SignatureMismatch, "signature_mismatch");
GROUPBLAME_DEFINE_ERROR(InvalidModel, "invalid_model");
GROUPBLAME_DEFINE_ERROR(InvalidState, "invalid_state");
GROUPBLAME_DEFINE_ERROR(EnumerationBoundExceeded, "enumeration_bound_exceeded");
GROUPBLAME_DEFINE_ERROR(InvalidSampleCount, "invalid_sample_count");
GROUPBLAME_DEFINE_ERROR(BalanceTooSmall, "balance_too_small");
GROUPBLAME_DEFINE_ERROR(InvalidScenario, "invalid_scenario");
GROUPBLAME_DEFINE_ERROR(TooManyAgents, "too_many_agents");
GROUPBLAME_DEFINE_ERROR(NotABijection, "not_a_bijection");
GROUPBLAME_DEFINE_ERROR(UnknownScenario, "unknown_scenario");
GROUPBLAME_DEFINE_ERROR(SerializationError, "serialization_error");

#undef GROUPBLAME_DEFINE_ERROR

}  // namespace groupblame
