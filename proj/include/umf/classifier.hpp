#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "umf/core.hpp"

namespace umf::classifier {

struct Variant {
  std::string variant_id;
  bool canonical = false;
  ModuleMatrix matrix;
  bool uses_external_tools = false;
  std::string notes;
};

struct AgentDescriptor {
  std::string agent_id;
  std::vector<Variant> variants;

  const Variant& canonical() const;
};

/// Everything absent: not an agent. Planning, memory and profile all absent: passive.
/// Anything else is active; Minimal counts as present.
CoreAgentKind classify_matrix(const ModuleMatrix& matrix);

/// Accepts a JSON array of descriptors (null or an empty document gives an empty list).
/// Throws ParseError on shape errors or a canonical-variant count other than one,
/// DuplicateAgent on repeated agent ids, InvalidMatrix naming the agent and variant.
std::vector<AgentDescriptor> parse_descriptors(const Json& doc);
std::vector<AgentDescriptor> load_descriptors(const std::string& path);

Json to_json(const AgentDescriptor& descriptor);

struct AuditRow {
  std::string agent_id;
  std::string variant_id;
  bool canonical = false;
  ModuleMatrix matrix;
  CoreAgentKind category = CoreAgentKind::NotAnAgent;
};

struct Finding {
  std::string severity;
  std::string agent_id;
  std::string message;
};

struct AuditReport {
  std::vector<AuditRow> rows;
  std::size_t passive_count = 0;
  std::size_t active_count = 0;
  std::size_t not_agent_count = 0;
  std::size_t total_agents = 0;
  std::size_t tool_users = 0;
  std::size_t tool_users_without_security = 0;
  std::vector<Finding> findings;
};

/// Rows cover every variant; counts use each agent's canonical variant.
AuditReport audit(const std::vector<AgentDescriptor>& descriptors);

/// Whole-number percentage, rounded half up; 0 when den is 0.
long percent(std::size_t num, std::size_t den);

Json to_json(const AuditReport& report);
std::string to_text(const AuditReport& report);

}  // namespace umf::classifier
