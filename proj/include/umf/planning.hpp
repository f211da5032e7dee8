#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "umf/core.hpp"

namespace umf::planning {

using Atom = std::string;
using AtomSet = std::set<Atom>;

struct TaskSpec {
  std::string task_id;
  std::string goal_text;
  std::set<std::string> domain_tags;
  AtomSet facts;
  std::optional<AtomSet> goal_atoms;
};

struct Subtask {
  std::string subtask_id;
  std::string parent;
  std::size_t ordinal = 0;
  std::string goal_text;
  std::vector<std::string> depends_on;
  // Trailing "#tag" tokens of the decomposition line; used for profile selection.
  std::set<std::string> domain_tags;
};

enum class StepOp { ToolCall, ModelCall, MemoryOp, Emit };
std::string_view to_string(StepOp op);

struct Step {
  StepOp op = StepOp::ToolCall;
  std::string target;
  Args args;
  friend bool operator==(const Step&, const Step&) = default;
};

struct Plan {
  std::string plan_id;
  std::string subtask_id;
  std::vector<Step> steps;
  double cost = 0.0;
  // Operator names for rule-based plans; empty for model-generated plans.
  std::vector<std::string> operator_sequence;
};

Json to_json(const Step& step);
Json to_json(const Plan& plan);

/// Precondition/effect operator. Optionally bound to a tool: its plan step then calls
/// that tool with the given args; unbound operators become emit steps.
struct Operator {
  std::string name;
  AtomSet preconditions;
  AtomSet add_effects;
  AtomSet del_effects;
  std::optional<std::string> tool_id;
  Args args;
};

/// Throws InvalidOperator when add and delete effects overlap.
void validate_operator(const Operator& op);

bool applicable(const Operator& op, const AtomSet& state);
AtomSet apply(const Operator& op, const AtomSet& state);
bool satisfies(const AtomSet& state, const AtomSet& goal);

/// Replays a sequence of operator names from facts; nullopt if a step is inapplicable
/// or unknown.
std::optional<AtomSet> replay(const AtomSet& facts, const std::vector<Operator>& operators,
                              const std::vector<std::string>& sequence);

/// Breadth-first search over atom states. Returns operator indices of a shortest
/// sequence reaching goal, preferring earlier-declared operators at each position.
std::optional<std::vector<std::size_t>> shortest_operator_sequence(
    const AtomSet& facts, const std::vector<Operator>& operators, const AtomSet& goal,
    std::size_t max_depth);

/// Up to k distinct operator sequences that reach goal, in breadth-first order (shorter
/// first, then declaration order). A sequence stops at the first goal state it reaches
/// and never revisits a state.
std::vector<std::vector<std::size_t>> enumerate_operator_sequences(
    const AtomSet& facts, const std::vector<Operator>& operators, const AtomSet& goal,
    std::size_t max_depth, std::size_t k);

/// Throws NoPlanFound if the goal is unreachable within max_depth.
Plan rule_based_plan(const AtomSet& facts, const std::vector<Operator>& operators,
                     const AtomSet& goal, std::size_t max_depth);

// ---------------------------------------------------------------------------
// Decomposition

enum class DecomposeMode { Iterative, NonIterative };

struct Decomposition {
  std::vector<Subtask> subtasks;
  bool done = false;
};

inline constexpr std::string_view kDecomposePrefix = "DECOMPOSE: ";
inline constexpr std::string_view kDecomposeNextPrefix = "DECOMPOSE-NEXT: ";
inline constexpr std::string_view kPlanPrefix = "PLAN: ";
inline constexpr std::string_view kFormalizePrefix = "FORMALIZE: ";

/// NonIterative: asks for the whole breakdown, one subtask per nonempty reply line.
/// Iterative: asks for the next subtask given prior outcomes; "DONE" (or an empty reply)
/// ends the decomposition.
Decomposition decompose(const TaskSpec& task, DecomposeMode mode,
                        const std::vector<std::pair<std::string, std::string>>& prior_outcomes,
                        const ModelPort& model);

/// Asks the model to translate a subtask into goal atoms (whitespace or comma separated).
AtomSet formalize_goal(const Subtask& subtask, const ModelPort& model);

// ---------------------------------------------------------------------------
// Plan generation and selection

struct Strategy {
  std::size_t k = 1;

  static Strategy single_path() { return Strategy{1}; }
  static Strategy multi_path(std::size_t k);
  bool multi() const { return k > 1; }
};

struct RuleDomain {
  AtomSet facts;
  AtomSet goal;
  std::vector<Operator> operators;
  std::size_t max_depth = 6;
};

struct Technique {
  enum class Kind { RuleBased, LmPowered } kind = Kind::LmPowered;
  RuleDomain domain;  // used when kind == RuleBased

  static Technique lm_powered() { return Technique{}; }
  static Technique rule_based(RuleDomain d) { return Technique{Kind::RuleBased, std::move(d)}; }
};

/// Inline-call tool ids that denote memory operations rather than tools.
bool is_memory_call(std::string_view tool_id);

/// Converts parsed inline calls in text into plan steps.
std::vector<Step> steps_from_text(std::string_view text);

/// Generates candidate plans. When tool_inventory is given, rule-based operators bound to
/// tools outside it are ignored and model candidates calling such tools are rejected.
std::vector<Plan> generate_plans(const Subtask& subtask, const Strategy& strategy,
                                 const Technique& technique, const ModelPort& model,
                                 const std::set<std::string>* tool_inventory = nullptr);

using Evaluator = std::function<double(const Plan&)>;

double default_score(const Plan& plan);

/// argmax of evaluator (default: -cost); ties go to the smallest plan_id.
const Plan& select_plan(const std::vector<Plan>& plans, const Evaluator& evaluator = default_score);

// ---------------------------------------------------------------------------
// Feedback

enum class FeedbackSource { Human, Tool, Sibling };
std::string_view to_string(FeedbackSource s);

struct Feedback {
  FeedbackSource source = FeedbackSource::Tool;
  std::string content;
  std::optional<double> rating;
};

struct FeedbackLexicon {
  std::vector<std::string> failure_tokens{"error", "exception", "fail"};
  std::vector<std::string> abort_tokens{"ABORT"};
  double rating_threshold = 0.5;
};

enum class RevisionHint { Retry, Proceed, Abort };
std::string_view to_string(RevisionHint h);

/// Human abort token -> Abort; low rating or tool failure token -> Retry; else Proceed.
RevisionHint incorporate_feedback(const Feedback& feedback, const FeedbackLexicon& lexicon = {});

}  // namespace umf::planning
