#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "umf/core.hpp"
#include "umf/memory.hpp"
#include "umf/security.hpp"

namespace umf::action {

enum class Trigger { PlanFollowing, ApiCallRequest };
enum class Goal { TaskCompletion, Communication, EnvironmentExploration };
enum class Impact { EnvironmentChange, InternalStateChange, Chained };

std::string_view to_string(Trigger t);
std::string_view to_string(Goal g);
std::string_view to_string(Impact i);

struct Span {
  std::size_t begin = 0;  // offset of '['
  std::size_t end = 0;    // one past the closing ']'
  friend bool operator==(const Span&, const Span&) = default;
};

struct InlineCall {
  std::string tool_id;
  Args args;
  Span span;
  friend bool operator==(const InlineCall&, const InlineCall&) = default;
};

/// Scans text for `[CALL tool(name="value", ...)]` markers. Values are double-quoted
/// with backslash escapes for `"` and `\`. Malformed markers are skipped.
std::vector<InlineCall> parse_inline_calls(std::string_view text);

/// Canonical marker text for a call; parse_inline_calls(render_inline_call(c)) yields c
/// (with a span covering the whole string).
std::string render_inline_call(std::string_view tool_id, const Args& args);

struct ActionRequest {
  Trigger trigger = Trigger::PlanFollowing;
  Goal goal = Goal::TaskCompletion;
  std::string target;
  Args args;
  // When set, the tool output is stored in memory under this key.
  std::optional<std::string> remember_as;
};

struct ActionResult {
  std::string output;
  std::set<Impact> impact;
  std::vector<ActionRequest> chained_requests;
  // Payload exactly as the tool received it.
  std::string delivered_payload;
};

// ---------------------------------------------------------------------------
// Read-only knowledge repositories

struct Passage {
  std::size_t index = 0;
  std::string text;
  double score = 0.0;
};

class Repository {
 public:
  explicit Repository(std::vector<std::string> passages);
  const std::vector<std::string>& passages() const { return passages_; }
  /// Top-n passages by trigram-embedding cosine; equal scores keep corpus order.
  std::vector<Passage> query(std::string_view text, std::size_t top_n) const;

 private:
  std::vector<std::string> passages_;
  std::vector<memory::Embedding> vectors_;
};

using RepositorySet = std::map<std::string, Repository, std::less<>>;

std::vector<Passage> query_repository(const RepositorySet& repos, std::string_view repo_id,
                                      std::string_view query, std::size_t top_n);

// ---------------------------------------------------------------------------
// Tools

/// Named key-value environment state; only tools flagged as mutating write to it.
using EnvironmentState = std::map<std::string, std::string>;

struct ToolContext {
  EnvironmentState* environment = nullptr;
  const RepositorySet* repositories = nullptr;
};

/// A tool behavior receives the delivered payload and the arguments decoded from it.
/// It throws Error(ToolFailure) on failure.
using ToolBehavior =
    std::function<std::string(const std::string& payload, const Args& args, ToolContext& ctx)>;

struct Tool {
  ToolSpec spec;
  ToolBehavior behavior;
};

class ToolRegistry {
 public:
  void add(Tool tool);
  const Tool* find(std::string_view tool_id) const;
  const Tool& at(std::string_view tool_id) const;  // throws UnknownTool
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, Tool, std::less<>> tools_;
};

/// Arithmetic over + - * / with parentheses and unary minus. Throws ToolFailure on
/// malformed input or "division by zero".
double evaluate_arithmetic(std::string_view expr);
std::string format_number(double value);

ToolBehavior make_calculator();
ToolBehavior make_translator(std::map<std::string, std::string> phrases);
ToolBehavior make_wiki(std::string repo_id);
ToolBehavior make_remote_api();
ToolBehavior make_code_runner(std::map<std::string, std::string> scripted_results);
ToolBehavior make_calendar(std::string today);
ToolBehavior make_env_set();

/// Serializes args as a JSON object in argument order; this is the egress payload.
std::string serialize_args(const Args& args);
/// Best-effort inverse of serialize_args; returns empty args for non-object payloads.
Args decode_payload(const std::string& payload);

/// Hooks through which the caller observes egress decisions and deliveries.
struct ActionObserver {
  virtual ~ActionObserver() = default;
  virtual void on_egress_verdict(const ToolSpec&, const std::string& /*pre_filter*/,
                                 const security::Verdict&) {}
  virtual void on_delivery(const ToolSpec&, const std::string& /*payload*/) {}
};

struct ActionContext {
  const ToolRegistry* tools = nullptr;
  const security::Policy* guard = nullptr;
  memory::MemoryStore* memory = nullptr;
  std::string task_id;
  ToolContext tool_context;
  ActionObserver* observer = nullptr;
};

/// Runs one tool action. External payloads pass through filter_egress when a guard is
/// configured. Inline calls found in the tool output are returned as chained requests,
/// never executed here.
ActionResult execute_action(const ActionRequest& request, const ActionContext& ctx);

}  // namespace umf::action
