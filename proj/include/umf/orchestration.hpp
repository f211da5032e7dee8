#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "umf/action.hpp"
#include "umf/consensus.hpp"
#include "umf/core.hpp"
#include "umf/gateway.hpp"
#include "umf/memory.hpp"
#include "umf/planning.hpp"
#include "umf/profile.hpp"
#include "umf/security.hpp"
#include "umf/trace.hpp"

namespace umf::orchestration {

enum class Architecture {
  SingleActive,
  SinglePassive,
  UniformPassive,
  UniformActive,
  HybridOneActive,
  ManyActiveManyPassive,
};

/// How an active core-agent reaches passive workers: by dispatching plan steps to them
/// directly, or by configuring the model and letting its inline calls drive them.
enum class Wiring { Direct, ViaModel };

/// How multiple active core-agents agree on who orchestrates a task.
enum class Coordination { Raft, Gateway };

std::string_view to_string(Architecture a);
Architecture architecture_from_string(std::string_view s);
std::string_view to_string(Wiring w);
Wiring wiring_from_string(std::string_view s);
std::string_view to_string(Coordination c);
Coordination coordination_from_string(std::string_view s);

struct PlanningConfig {
  planning::DecomposeMode mode = planning::DecomposeMode::NonIterative;
  planning::Strategy strategy = planning::Strategy::single_path();
  bool rule_based = false;
  std::vector<planning::Operator> operators;
  std::size_t max_depth = 6;
  planning::FeedbackLexicon lexicon;
  std::size_t max_retries = 1;
  std::size_t max_iterations = 8;  // bound on iterative decomposition rounds
};

struct MemoryConfig {
  memory::Location location = memory::Location::Embedded;
  std::size_t capacity = 32;
};

struct ActiveCoreAgent {
  std::string id;
  std::set<std::string> domains;
  std::string model;
  PlanningConfig planning;
  std::optional<memory::MemoryStore> memory;
  std::vector<profile::Profile> profiles;
  std::vector<std::string> tools;
  std::optional<security::Policy> security;
  std::string guard_model;  // model backing lm guardrails; empty means `model`
  std::size_t respond_candidates = 1;
  std::size_t capacity = 4;

  ModuleMatrix matrix() const;
};

/// Stateless executor: action plus optional security. It has no slot for planning,
/// memory or a profile.
struct PassiveCoreAgent {
  std::string id;
  std::set<std::string> domains;
  std::vector<std::string> tools;
  std::optional<security::Policy> security;

  ModuleMatrix matrix() const;
};

using CoreAgent = std::variant<ActiveCoreAgent, PassiveCoreAgent>;

/// Declarative form of a core-agent as read from a scenario. build_core_agent rejects
/// passive declarations that carry planning, memory or profiles.
struct CoreAgentDecl {
  std::string id;
  CoreAgentKind kind = CoreAgentKind::Active;
  std::set<std::string> domains;
  std::string model;
  std::optional<PlanningConfig> planning;
  std::optional<MemoryConfig> memory;
  std::vector<profile::Profile> profiles;
  std::vector<std::string> tools;
  std::optional<security::Policy> security;
  std::string guard_model;
  std::size_t respond_candidates = 1;
  std::size_t capacity = 4;
};

CoreAgent build_core_agent(CoreAgentDecl decl);

struct Topology {
  Architecture architecture = Architecture::SingleActive;
  std::vector<ActiveCoreAgent> actives;
  std::vector<PassiveCoreAgent> passives;  // full inventory; `attached` is the switch state
  std::set<std::string> attached;
  std::string front_model;  // model that passive workers serve
  std::vector<profile::Profile> front_profiles;  // static profiles assigned at setup
  Wiring wiring = Wiring::Direct;
  Coordination coordination = Coordination::Raft;
};

/// Shared, read-only inputs of a run.
struct Resources {
  action::ToolRegistry tools;
  action::RepositorySet repositories;
  std::map<std::string, ScriptedModel, std::less<>> models;
};

/// Throws TopologyInvalid when the architecture's composition rules, tool ownership or
/// model bindings do not hold.
void validate_topology(const Topology& topology, const Resources& resources);

inline constexpr std::size_t kDefaultStepLimit = 100;

struct RuntimeConfig {
  std::size_t step_limit = kDefaultStepLimit;
  consensus::NetConfig election_net;
  std::uint64_t election_seed = 1;
  std::uint64_t election_max_ticks = 200;
  std::uint64_t gateway_ttl = kDefaultGatewayTtl;
};

struct TaskOutcome {
  std::string task_id;
  std::string status;  // completed, blocked
  std::string answer;
  std::string orchestrator;
};

class TracedModel;

/// Runs tasks over one topology, appending every action to a trace.
///
/// Construction performs setup: topology validation, static profile assignment for the
/// model front, advisory warnings, leader election (multi-active, Raft) or gateway
/// registration (multi-active, gateway). run_task always ends the task with a task_done
/// event; when it throws (StepLimitExceeded or any other error) that event carries the
/// failure status and the trace up to that point is kept.
class Orchestrator {
 public:
  Orchestrator(Topology topology, const Resources& resources, RuntimeConfig config, Trace& trace);

  TaskOutcome run_task(const planning::TaskSpec& task);

  void attach(const std::string& passive_id);
  void detach(const std::string& passive_id);

  std::set<std::string> tool_inventory() const;
  const Topology& topology() const { return topology_; }
  const action::EnvironmentState& environment() const { return environment_; }
  const std::optional<std::string>& leader() const { return leader_; }
  const Gateway* gateway() const { return gateway_ ? &*gateway_ : nullptr; }
  std::uint64_t tick() const { return tick_; }

 private:
  friend class TracedModel;

  struct Owner {
    std::string id;
    ActiveCoreAgent* active = nullptr;
    const PassiveCoreAgent* passive = nullptr;
  };

  struct Dispatch {
    std::string output;
    std::uint64_t called_seq = 0;
    std::vector<action::ActionRequest> chained;
  };

  std::uint64_t emit(EventKind kind, const std::string& actor, Json payload);
  void count_step();
  void setup();
  bool passive_only() const;

  ModelResponse call_model(const std::string& actor, const std::string& model_id,
                           const profile::Profile* profile, const std::vector<profile::Profile>* extra,
                           ModelRequest request, std::string_view phase);

  std::optional<Owner> owner_of(std::string_view tool_id);
  const security::Policy* guard_for(const Owner& owner, const ActiveCoreAgent* orchestrator) const;
  Dispatch dispatch_tool(const action::ActionRequest& request, std::uint64_t origin_seq,
                         const std::string& requester, ActiveCoreAgent* orchestrator,
                         const std::string& task_id);
  std::string dispatch_with_chain(const action::ActionRequest& request, std::uint64_t origin_seq,
                                  const std::string& requester, ActiveCoreAgent* orchestrator,
                                  const std::string& task_id);

  TaskOutcome run_passive_task(const planning::TaskSpec& task);
  TaskOutcome run_active_task(ActiveCoreAgent& agent, const planning::TaskSpec& task);
  ActiveCoreAgent& orchestrator_for(const planning::TaskSpec& task);

  std::string solve_subtask(ActiveCoreAgent& agent, const planning::TaskSpec& task,
                            const planning::Subtask& subtask, std::size_t subtask_count,
                            planning::AtomSet& world);
  std::string execute_step(ActiveCoreAgent& agent, const planning::TaskSpec& task,
                           const planning::Step& step, std::uint64_t origin_seq);
  std::string execute_memory_step(ActiveCoreAgent& agent, const planning::TaskSpec& task,
                                  const planning::Step& step);
  const profile::Profile* select_profile(const ActiveCoreAgent& agent, std::string_view phase,
                                         const std::set<std::string>& tags) const;
  ActiveCoreAgent* find_active(std::string_view id);

  Topology topology_;
  const Resources& resources_;
  RuntimeConfig config_;
  Trace& trace_;
  EnvelopeLedger ledger_;
  action::EnvironmentState environment_;
  std::optional<std::string> leader_;
  std::optional<Gateway> gateway_;
  std::uint64_t tick_ = 0;
  std::size_t steps_ = 0;
};

}  // namespace umf::orchestration
