#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace umf {

enum class ErrorCode {
  InvalidMatrix,
  InvalidCoreAgent,
  InvalidEnvelope,
  InvalidOperator,
  MalformedDecomposition,
  NoPlanFound,
  MalformedPlan,
  EmptyPlanSet,
  InvalidProfile,
  EmptyGeneration,
  MissingField,
  UnknownTool,
  ToolFailure,
  BlockedByPolicy,
  UnknownRepository,
  InvalidPolicy,
  GuardrailUnavailable,
  ElectionTimeout,
  TopologyInvalid,
  StepLimitExceeded,
  DuplicateRegistration,
  NoAvailableCoreAgent,
  UnknownPassiveAgent,
  AlreadyAttached,
  NotAttached,
  ParseError,
  DuplicateAgent,
  ScenarioInvalid,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this one exception type; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace umf
