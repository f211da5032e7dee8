#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "umf/error.hpp"

namespace umf {

using Json = nlohmann::ordered_json;

/// Ordered name -> value argument list. Insertion order is significant: it is the
/// order used when rendering inline calls and serializing egress payloads.
using Args = std::vector<std::pair<std::string, std::string>>;

const std::string* find_arg(const Args& args, std::string_view name);

// ---------------------------------------------------------------------------
// Module presence and classification vocabulary

/// Presence level of one module. Ordered Absent < Minimal < Present.
enum class Presence { Absent = 0, Minimal = 1, Present = 2 };

/// "X", "M" or "-", the notation used in descriptor files.
std::string_view to_symbol(Presence p);
Presence presence_from_symbol(std::string_view symbol);

inline bool is_present(Presence p) { return p != Presence::Absent; }

struct ModuleMatrix {
  Presence planning = Presence::Absent;
  Presence profile = Presence::Absent;
  Presence memory = Presence::Absent;
  Presence action = Presence::Absent;
  Presence security = Presence::Absent;

  bool all_absent() const;
  friend bool operator==(const ModuleMatrix&, const ModuleMatrix&) = default;
};

/// Returns the matrix unchanged if it can describe a core-agent (action non-absent)
/// or nothing at all (every module absent). Throws InvalidMatrix otherwise.
ModuleMatrix validate_module_matrix(const ModuleMatrix& matrix);

enum class CoreAgentKind { Active, Passive, NotAnAgent };

std::string_view to_string(CoreAgentKind kind);

// ---------------------------------------------------------------------------
// Envelopes

enum class EnvelopeKind { Task, Plan, ApiCallRequest, ToolResult, Feedback, HumanMsg, Control };

std::string_view to_string(EnvelopeKind kind);

struct Envelope {
  std::string msg_id;
  std::string sender;
  std::string recipient;
  EnvelopeKind kind = EnvelopeKind::Task;
  Json payload;
  std::optional<std::string> correlation;
};

/// Issues run-unique message ids and checks that correlations point backwards.
/// Because a correlation can only name an id that was issued earlier, chains are
/// acyclic by construction.
class EnvelopeLedger {
 public:
  Envelope make(std::string sender, std::string recipient, EnvelopeKind kind, Json payload,
                std::optional<std::string> correlation = std::nullopt);

  bool issued(std::string_view msg_id) const;
  std::size_t size() const { return issued_.size(); }

  /// Follows correlation links starting at msg_id; returns the chain (msg_id first).
  std::vector<std::string> chain(const std::string& msg_id) const;

 private:
  std::vector<std::string> issued_;
  std::vector<std::optional<std::string>> correlations_;
};

// ---------------------------------------------------------------------------
// Model port

struct ModelRequest {
  std::string prompt;
  std::optional<std::string> system_prefix;
  std::vector<std::string> adapter_tags;
  std::size_t max_candidates = 1;
};

struct ModelResponse {
  std::vector<std::string> candidates;
  std::string source;
};

class ModelPort {
 public:
  virtual ~ModelPort() = default;
  virtual ModelResponse complete(const ModelRequest& request) const = 0;
};

/// Unanchored wildcard match: the pieces between '*' must occur in the text in order,
/// anywhere. "hotwire*" and "*hotwire" both match any text containing "hotwire",
/// "CLASSIFY: *weapon*" needs "CLASSIFY: " followed later by "weapon", and a bare "*"
/// (or the empty pattern) matches everything.
bool pattern_matches(std::string_view pattern, std::string_view text);

struct ScriptRule {
  std::string id;
  std::string match;
  std::optional<std::string> required_adapter_tag;
  std::vector<std::string> responses;
};

/// Pure function of (script, request). Falls back to a single "ECHO:<prompt>" candidate.
ModelResponse scripted_complete(const std::vector<ScriptRule>& script, const ModelRequest& request);

class ScriptedModel final : public ModelPort {
 public:
  ScriptedModel() = default;
  explicit ScriptedModel(std::vector<ScriptRule> script);

  ModelResponse complete(const ModelRequest& request) const override {
    return scripted_complete(script_, request);
  }
  const std::vector<ScriptRule>& script() const { return script_; }

 private:
  std::vector<ScriptRule> script_;
};

// ---------------------------------------------------------------------------
// Tools

struct ToolSpec {
  std::string tool_id;
  std::set<std::string> domains;
  bool external = false;
  std::vector<std::string> arg_names;
  bool mutates_environment = false;
};

std::string to_lower(std::string_view text);

}  // namespace umf
