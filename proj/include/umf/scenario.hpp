#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "umf/core.hpp"
#include "umf/orchestration.hpp"
#include "umf/planning.hpp"
#include "umf/trace.hpp"

namespace umf::scenario {

struct Control {
  enum class Op { Attach, Detach } op = Op::Attach;
  std::string passive_id;
};

using ScenarioStep = std::variant<planning::TaskSpec, Control>;

enum class AssertionKind { EventCount, EventOrder, ForbidSubstringInExternalPayload, RequireEvent, ForbidEvent };

std::string_view to_string(AssertionKind k);

/// One `field=value` test. Fields are seq, tick, kind, actor or payload.<path> with
/// dot-separated object keys.
struct Predicate {
  std::string field;
  Json value;
};

struct AssertionSpec {
  AssertionKind kind = AssertionKind::EventCount;
  std::string description;
  EventKind event = EventKind::TaskDone;  // event_count, require_event, forbid_event
  EventKind before = EventKind::TaskDone;  // event_order
  EventKind after = EventKind::TaskDone;
  std::optional<std::size_t> min;
  std::optional<std::size_t> max;
  std::string text;  // forbid_substring_in_external_payload
  std::vector<Predicate> where;
};

struct AssertionResult {
  std::string description;
  AssertionKind kind = AssertionKind::EventCount;
  bool passed = false;
  std::string detail;
};

struct ScenarioSpec {
  std::string scenario_id;
  std::string description;
  std::uint64_t seed = 1;
  std::shared_ptr<const orchestration::Resources> resources;
  orchestration::Topology topology;
  orchestration::RuntimeConfig runtime;
  std::vector<ScenarioStep> steps;
  std::vector<AssertionSpec> assertions;
  std::optional<ErrorCode> expect_error;
};

/// Throws ScenarioInvalid for dangling references or malformed entries, and the
/// validation errors of the underlying modules (TopologyInvalid, InvalidPolicy, ...).
ScenarioSpec parse_scenario(const Json& doc);
ScenarioSpec load_scenario(const std::string& path);

bool predicate_holds(const TraceEvent& event, const Predicate& predicate);

std::vector<AssertionResult> check_assertions(const std::vector<TraceEvent>& events,
                                              const std::vector<AssertionSpec>& assertions);

/// Trace-level structural checks: no human_msg to a passive core-agent, every external
/// delivery preceded by its correlated privacy verdict, every task_received closed by a
/// task_done. Returns one message per violation.
std::vector<std::string> check_invariants(const std::vector<TraceEvent>& events,
                                          const std::set<std::string>& passive_ids);

struct ScenarioRun {
  std::string scenario_id;
  std::uint64_t seed = 0;
  Trace trace;
  std::vector<orchestration::TaskOutcome> outcomes;
  std::vector<AssertionResult> results;
  std::optional<std::string> error;
  std::optional<ErrorCode> error_code;
  Json memory_dump;

  /// No unexpected error and every assertion passed.
  bool passed(const ScenarioSpec& spec) const;
};

/// Runs every step in order. Errors stop the run; the partial trace is kept and the
/// assertions are still evaluated against it.
ScenarioRun run_scenario(const ScenarioSpec& spec, std::optional<std::uint64_t> seed = std::nullopt);

Json to_json(const AssertionResult& r);

}  // namespace umf::scenario
