#include "umf/core.hpp"

#include <algorithm>
#include <cctype>

namespace umf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::InvalidCoreAgent: return "InvalidCoreAgent";
    case ErrorCode::InvalidEnvelope: return "InvalidEnvelope";
    case ErrorCode::InvalidOperator: return "InvalidOperator";
    case ErrorCode::MalformedDecomposition: return "MalformedDecomposition";
    case ErrorCode::NoPlanFound: return "NoPlanFound";
    case ErrorCode::MalformedPlan: return "MalformedPlan";
    case ErrorCode::EmptyPlanSet: return "EmptyPlanSet";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::EmptyGeneration: return "EmptyGeneration";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::UnknownTool: return "UnknownTool";
    case ErrorCode::ToolFailure: return "ToolFailure";
    case ErrorCode::BlockedByPolicy: return "BlockedByPolicy";
    case ErrorCode::UnknownRepository: return "UnknownRepository";
    case ErrorCode::InvalidPolicy: return "InvalidPolicy";
    case ErrorCode::GuardrailUnavailable: return "GuardrailUnavailable";
    case ErrorCode::ElectionTimeout: return "ElectionTimeout";
    case ErrorCode::TopologyInvalid: return "TopologyInvalid";
    case ErrorCode::StepLimitExceeded: return "StepLimitExceeded";
    case ErrorCode::DuplicateRegistration: return "DuplicateRegistration";
    case ErrorCode::NoAvailableCoreAgent: return "NoAvailableCoreAgent";
    case ErrorCode::UnknownPassiveAgent: return "UnknownPassiveAgent";
    case ErrorCode::AlreadyAttached: return "AlreadyAttached";
    case ErrorCode::NotAttached: return "NotAttached";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateAgent: return "DuplicateAgent";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
  }
  return "Unknown";
}

const std::string* find_arg(const Args& args, std::string_view name) {
  for (const auto& [key, value] : args) {
    if (key == name) return &value;
  }
  return nullptr;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view to_symbol(Presence p) {
  switch (p) {
    case Presence::Present: return "X";
    case Presence::Minimal: return "M";
    case Presence::Absent: return "-";
  }
  return "-";
}

Presence presence_from_symbol(std::string_view symbol) {
  if (symbol == "X") return Presence::Present;
  if (symbol == "M") return Presence::Minimal;
  if (symbol == "-") return Presence::Absent;
  throw Error(ErrorCode::ParseError, "unknown presence symbol '" + std::string(symbol) + "'");
}

bool ModuleMatrix::all_absent() const {
  return planning == Presence::Absent && profile == Presence::Absent &&
         memory == Presence::Absent && action == Presence::Absent &&
         security == Presence::Absent;
}

ModuleMatrix validate_module_matrix(const ModuleMatrix& matrix) {
  if (is_present(matrix.action) || matrix.all_absent()) return matrix;
  throw Error(ErrorCode::InvalidMatrix,
              "action module is absent while other modules are present");
}

std::string_view to_string(CoreAgentKind kind) {
  switch (kind) {
    case CoreAgentKind::Active: return "Active";
    case CoreAgentKind::Passive: return "Passive";
    case CoreAgentKind::NotAnAgent: return "N/A";
  }
  return "N/A";
}

std::string_view to_string(EnvelopeKind kind) {
  switch (kind) {
    case EnvelopeKind::Task: return "task";
    case EnvelopeKind::Plan: return "plan";
    case EnvelopeKind::ApiCallRequest: return "api_call_request";
    case EnvelopeKind::ToolResult: return "tool_result";
    case EnvelopeKind::Feedback: return "feedback";
    case EnvelopeKind::HumanMsg: return "human_msg";
    case EnvelopeKind::Control: return "control";
  }
  return "control";
}

Envelope EnvelopeLedger::make(std::string sender, std::string recipient, EnvelopeKind kind,
                              Json payload, std::optional<std::string> correlation) {
  if (correlation && !issued(*correlation)) {
    throw Error(ErrorCode::InvalidEnvelope,
                "correlation '" + *correlation + "' does not name an earlier message");
  }
  Envelope env;
  env.msg_id = "m" + std::to_string(issued_.size());
  env.sender = std::move(sender);
  env.recipient = std::move(recipient);
  env.kind = kind;
  env.payload = std::move(payload);
  env.correlation = std::move(correlation);
  issued_.push_back(env.msg_id);
  correlations_.push_back(env.correlation);
  return env;
}

bool EnvelopeLedger::issued(std::string_view msg_id) const {
  return std::find(issued_.begin(), issued_.end(), msg_id) != issued_.end();
}

std::vector<std::string> EnvelopeLedger::chain(const std::string& msg_id) const {
  std::vector<std::string> out;
  std::optional<std::string> cursor = msg_id;
  while (cursor) {
    auto it = std::find(issued_.begin(), issued_.end(), *cursor);
    if (it == issued_.end()) break;
    out.push_back(*cursor);
    cursor = correlations_[static_cast<std::size_t>(it - issued_.begin())];
  }
  return out;
}

bool pattern_matches(std::string_view pattern, std::string_view text) {
  std::size_t at = 0;
  while (!pattern.empty()) {
    const auto star = pattern.find('*');
    const auto piece = pattern.substr(0, star);
    if (!piece.empty()) {
      const auto hit = text.find(piece, at);
      if (hit == std::string_view::npos) return false;
      at = hit + piece.size();
    }
    if (star == std::string_view::npos) break;
    pattern.remove_prefix(star + 1);
  }
  return true;
}

ScriptedModel::ScriptedModel(std::vector<ScriptRule> script) : script_(std::move(script)) {
  for (std::size_t i = 0; i < script_.size(); ++i) {
    if (script_[i].id.empty()) script_[i].id = "rule-" + std::to_string(i);
  }
}

ModelResponse scripted_complete(const std::vector<ScriptRule>& script,
                                const ModelRequest& request) {
  const std::size_t limit = std::max<std::size_t>(request.max_candidates, 1);
  for (std::size_t i = 0; i < script.size(); ++i) {
    const auto& rule = script[i];
    if (rule.responses.empty() || !pattern_matches(rule.match, request.prompt)) continue;
    if (rule.required_adapter_tag &&
        std::find(request.adapter_tags.begin(), request.adapter_tags.end(),
                  *rule.required_adapter_tag) == request.adapter_tags.end()) {
      continue;
    }
    ModelResponse response;
    const std::size_t n = std::min(limit, rule.responses.size());
    response.candidates.assign(rule.responses.begin(), rule.responses.begin() + n);
    response.source = rule.id.empty() ? "rule-" + std::to_string(i) : rule.id;
    return response;
  }
  return ModelResponse{{"ECHO:" + request.prompt}, "echo"};
}

}  // namespace umf
