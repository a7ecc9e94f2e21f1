#pragma once

#include <stdexcept>
#include <string>

namespace heraldsim {

// Exit codes used by the command line tool, one per failure category.
enum class ErrorCategory : int {
  InvalidArgument = 3,
  ZeroProbabilityHerald = 4,
  CutoffTooSmall = 5,
  Accuracy = 6,
  Positivity = 7,
  Divergence = 8,
  ProtocolViolation = 9,
  Config = 10,
  InvalidState = 11,
  Io = 12,
};

class SimError : public std::runtime_error {
 public:
  SimError(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define HERALDSIM_DEFINE_ERROR(Name, Category)                      \
  class Name : public SimError {                                    \
   public:                                                          \
    explicit Name(const std::string& what)                          \
        : SimError(ErrorCategory::Category, what) {}                \
  };

HERALDSIM_DEFINE_ERROR(ZeroProbabilityHerald, ZeroProbabilityHerald)
HERALDSIM_DEFINE_ERROR(CutoffTooSmall, CutoffTooSmall)
HERALDSIM_DEFINE_ERROR(AccuracyFailure, Accuracy)
HERALDSIM_DEFINE_ERROR(PositivityFailure, Positivity)
HERALDSIM_DEFINE_ERROR(DivergenceError, Divergence)
HERALDSIM_DEFINE_ERROR(ProtocolViolation, ProtocolViolation)
HERALDSIM_DEFINE_ERROR(ConfigError, Config)
HERALDSIM_DEFINE_ERROR(InvalidState, InvalidState)
HERALDSIM_DEFINE_ERROR(IoError, Io)

#undef HERALDSIM_DEFINE_ERROR

}  // namespace heraldsim
