#include "umf/planning.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include "umf/action.hpp"

namespace umf::planning {

std::string_view to_string(StepOp op) {
  switch (op) {
    case StepOp::ToolCall: return "tool_call";
    case StepOp::ModelCall: return "model_call";
    case StepOp::MemoryOp: return "memory_op";
    case StepOp::Emit: return "emit";
  }
  return "emit";
}

Json to_json(const Step& step) {
  Json args = Json::object();
  for (const auto& [k, v] : step.args) args[k] = v;
  return Json{{"op", to_string(step.op)}, {"target", step.target}, {"args", std::move(args)}};
}

Json to_json(const Plan& plan) {
  Json steps = Json::array();
  for (const auto& s : plan.steps) steps.push_back(to_json(s));
  Json j{{"plan_id", plan.plan_id},
         {"subtask_id", plan.subtask_id},
         {"cost", plan.cost},
         {"steps", std::move(steps)}};
  if (!plan.operator_sequence.empty()) j["operators"] = plan.operator_sequence;
  return j;
}

// ---------------------------------------------------------------------------
// State-space search

void validate_operator(const Operator& op) {
  for (const auto& a : op.add_effects) {
    if (op.del_effects.count(a)) {
      throw Error(ErrorCode::InvalidOperator,
                  "operator '" + op.name + "' both adds and deletes '" + a + "'");
    }
  }
}

bool applicable(const Operator& op, const AtomSet& state) {
  return std::includes(state.begin(), state.end(), op.preconditions.begin(),
                       op.preconditions.end());
}

AtomSet apply(const Operator& op, const AtomSet& state) {
  AtomSet next;
  for (const auto& a : state) {
    if (!op.del_effects.count(a)) next.insert(a);
  }
  next.insert(op.add_effects.begin(), op.add_effects.end());
  return next;
}

bool satisfies(const AtomSet& state, const AtomSet& goal) {
  return std::includes(state.begin(), state.end(), goal.begin(), goal.end());
}

std::optional<AtomSet> replay(const AtomSet& facts, const std::vector<Operator>& operators,
                              const std::vector<std::string>& sequence) {
  AtomSet state = facts;
  for (const auto& name : sequence) {
    auto it = std::find_if(operators.begin(), operators.end(),
                           [&](const Operator& op) { return op.name == name; });
    if (it == operators.end() || !applicable(*it, state)) return std::nullopt;
    state = planning::apply(*it, state);
  }
  return state;
}

std::optional<std::vector<std::size_t>> shortest_operator_sequence(
    const AtomSet& facts, const std::vector<Operator>& operators, const AtomSet& goal,
    std::size_t max_depth) {
  for (const auto& op : operators) validate_operator(op);
  if (satisfies(facts, goal)) return std::vector<std::size_t>{};

  struct Node {
    AtomSet state;
    std::vector<std::size_t> path;
  };
  // Parents are dequeued in lexicographic order of their paths and children are pushed
  // in declaration order, so the first goal hit is the lexicographically smallest
  // shortest sequence. A state's first visit is via its smallest shortest path.
  std::set<AtomSet> seen{facts};
  std::deque<Node> frontier{{facts, {}}};
  while (!frontier.empty()) {
    Node node = std::move(frontier.front());
    frontier.pop_front();
    if (node.path.size() >= max_depth) continue;
    for (std::size_t i = 0; i < operators.size(); ++i) {
      if (!applicable(operators[i], node.state)) continue;
      AtomSet next = planning::apply(operators[i], node.state);
      if (!seen.insert(next).second) continue;
      std::vector<std::size_t> path = node.path;
      path.push_back(i);
      if (satisfies(next, goal)) return path;
      frontier.push_back({std::move(next), std::move(path)});
    }
  }
  return std::nullopt;
}

std::vector<std::vector<std::size_t>> enumerate_operator_sequences(
    const AtomSet& facts, const std::vector<Operator>& operators, const AtomSet& goal,
    std::size_t max_depth, std::size_t k) {
  for (const auto& op : operators) validate_operator(op);
  std::vector<std::vector<std::size_t>> found;
  if (k == 0) return found;
  if (satisfies(facts, goal)) {
    found.emplace_back();
    return found;
  }
  struct Node {
    std::vector<AtomSet> states;  // states along the path, facts first
    std::vector<std::size_t> path;
  };
  std::deque<Node> frontier{{{facts}, {}}};
  while (!frontier.empty() && found.size() < k) {
    Node node = std::move(frontier.front());
    frontier.pop_front();
    if (node.path.size() >= max_depth) continue;
    const AtomSet& state = node.states.back();
    for (std::size_t i = 0; i < operators.size() && found.size() < k; ++i) {
      if (!applicable(operators[i], state)) continue;
      AtomSet next = planning::apply(operators[i], state);
      if (std::find(node.states.begin(), node.states.end(), next) != node.states.end()) continue;
      Node child{node.states, node.path};
      child.path.push_back(i);
      if (satisfies(next, goal)) {
        found.push_back(std::move(child.path));
        continue;
      }
      child.states.push_back(std::move(next));
      frontier.push_back(std::move(child));
    }
  }
  return found;
}

namespace {

Step step_for(const Operator& op) {
  if (op.tool_id) return Step{StepOp::ToolCall, *op.tool_id, op.args};
  return Step{StepOp::Emit, "answer", Args{{"operator", op.name}}};
}

Plan plan_from_sequence(const std::vector<Operator>& operators,
                        const std::vector<std::size_t>& sequence) {
  Plan plan;
  for (std::size_t i : sequence) {
    plan.steps.push_back(step_for(operators[i]));
    plan.operator_sequence.push_back(operators[i].name);
  }
  plan.cost = static_cast<double>(plan.steps.size());
  return plan;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> nonempty_lines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
    if (!line.empty()) out.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

Subtask make_subtask(const TaskSpec& task, std::size_t ordinal, const std::string& line) {
  Subtask s;
  s.parent = task.task_id;
  s.ordinal = ordinal;
  s.subtask_id = task.task_id + ".s" + std::to_string(ordinal);
  if (ordinal > 0) s.depends_on.push_back(task.task_id + ".s" + std::to_string(ordinal - 1));

  std::istringstream in(line);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  while (!words.empty() && words.back().size() > 1 && words.back().front() == '#') {
    s.domain_tags.insert(words.back().substr(1));
    words.pop_back();
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) s.goal_text += ' ';
    s.goal_text += words[i];
  }
  return s;
}

}  // namespace

Plan rule_based_plan(const AtomSet& facts, const std::vector<Operator>& operators,
                     const AtomSet& goal, std::size_t max_depth) {
  auto seq = shortest_operator_sequence(facts, operators, goal, max_depth);
  if (!seq) {
    throw Error(ErrorCode::NoPlanFound,
                "goal unreachable within depth " + std::to_string(max_depth));
  }
  Plan plan = plan_from_sequence(operators, *seq);
  plan.plan_id = "rule";
  return plan;
}

// ---------------------------------------------------------------------------
// Decomposition

Decomposition decompose(const TaskSpec& task, DecomposeMode mode,
                        const std::vector<std::pair<std::string, std::string>>& prior_outcomes,
                        const ModelPort& model) {
  ModelRequest req;
  Decomposition out;
  if (mode == DecomposeMode::NonIterative) {
    req.prompt = std::string(kDecomposePrefix) + task.goal_text;
    const auto resp = model.complete(req);
    const auto lines = nonempty_lines(resp.candidates.empty() ? "" : resp.candidates.front());
    if (lines.empty()) {
      throw Error(ErrorCode::MalformedDecomposition, "model returned an empty decomposition");
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      out.subtasks.push_back(make_subtask(task, i, lines[i]));
    }
    out.done = true;
    return out;
  }

  req.prompt = std::string(kDecomposeNextPrefix) + task.goal_text;
  for (const auto& [id, result] : prior_outcomes) req.prompt += "\n[DONE " + id + "] " + result;
  const auto resp = model.complete(req);
  const auto lines = nonempty_lines(resp.candidates.empty() ? "" : resp.candidates.front());
  if (lines.empty() || lines.front() == "DONE") {
    out.done = true;
    return out;
  }
  out.subtasks.push_back(make_subtask(task, prior_outcomes.size(), lines.front()));
  return out;
}

AtomSet formalize_goal(const Subtask& subtask, const ModelPort& model) {
  ModelRequest req;
  req.prompt = std::string(kFormalizePrefix) + subtask.goal_text;
  const auto resp = model.complete(req);
  AtomSet atoms;
  if (resp.candidates.empty()) return atoms;
  std::string text = resp.candidates.front();
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  std::string atom;
  while (in >> atom) atoms.insert(atom);
  return atoms;
}

// ---------------------------------------------------------------------------
// Plan generation

Strategy Strategy::multi_path(std::size_t k) {
  if (k < 2) throw Error(ErrorCode::MalformedPlan, "multi_path needs k >= 2");
  return Strategy{k};
}

bool is_memory_call(std::string_view tool_id) {
  return tool_id == "memory_write" || tool_id == "memory_read" || tool_id == "table_insert" ||
         tool_id == "table_select";
}

std::vector<Step> steps_from_text(std::string_view text) {
  std::vector<Step> steps;
  for (auto& call : action::parse_inline_calls(text)) {
    const StepOp op = is_memory_call(call.tool_id) ? StepOp::MemoryOp : StepOp::ToolCall;
    steps.push_back(Step{op, std::move(call.tool_id), std::move(call.args)});
  }
  return steps;
}

std::vector<Plan> generate_plans(const Subtask& subtask, const Strategy& strategy,
                                 const Technique& technique, const ModelPort& model,
                                 const std::set<std::string>* tool_inventory) {
  std::vector<Plan> plans;
  auto label = [&](Plan& p, std::size_t i) {
    p.plan_id = subtask.subtask_id + ".p" + std::to_string(i);
    p.subtask_id = subtask.subtask_id;
  };

  if (technique.kind == Technique::Kind::RuleBased) {
    const RuleDomain& d = technique.domain;
    std::vector<Operator> usable;
    for (const auto& op : d.operators) {
      if (op.tool_id && tool_inventory && !tool_inventory->count(*op.tool_id)) continue;
      usable.push_back(op);
    }
    if (!strategy.multi()) {
      Plan p = rule_based_plan(d.facts, usable, d.goal, d.max_depth);
      label(p, 0);
      plans.push_back(std::move(p));
      return plans;
    }
    const auto seqs = enumerate_operator_sequences(d.facts, usable, d.goal, d.max_depth, strategy.k);
    if (seqs.empty()) throw Error(ErrorCode::NoPlanFound, "goal unreachable for " + subtask.subtask_id);
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      Plan p = plan_from_sequence(usable, seqs[i]);
      label(p, i);
      plans.push_back(std::move(p));
    }
    return plans;
  }

  ModelRequest req;
  req.prompt = std::string(kPlanPrefix) + subtask.goal_text;
  req.max_candidates = strategy.k;
  const auto resp = model.complete(req);
  bool saw_malformed = false;
  for (const auto& candidate : resp.candidates) {
    std::vector<Step> steps = steps_from_text(candidate);
    if (steps.empty()) {
      saw_malformed = true;
      continue;
    }
    const bool unavailable = tool_inventory && std::any_of(steps.begin(), steps.end(), [&](const Step& s) {
      return s.op == StepOp::ToolCall && !tool_inventory->count(s.target);
    });
    if (unavailable) continue;
    const bool duplicate = std::any_of(plans.begin(), plans.end(),
                                       [&](const Plan& p) { return p.steps == steps; });
    if (duplicate) continue;
    Plan p;
    p.steps = std::move(steps);
    p.cost = static_cast<double>(p.steps.size());
    label(p, plans.size());
    plans.push_back(std::move(p));
    if (plans.size() == strategy.k) break;
  }
  if (plans.empty()) {
    if (saw_malformed) {
      throw Error(ErrorCode::MalformedPlan, "model candidate for " + subtask.subtask_id +
                                                " contains no inline calls");
    }
    throw Error(ErrorCode::NoPlanFound,
                "no candidate for " + subtask.subtask_id + " uses only available tools");
  }
  return plans;
}

double default_score(const Plan& plan) { return -plan.cost; }

const Plan& select_plan(const std::vector<Plan>& plans, const Evaluator& evaluator) {
  if (plans.empty()) throw Error(ErrorCode::EmptyPlanSet, "no plans to select from");
  const Plan* best = &plans.front();
  double best_score = evaluator(*best);
  for (std::size_t i = 1; i < plans.size(); ++i) {
    const double s = evaluator(plans[i]);
    if (s > best_score || (s == best_score && plans[i].plan_id < best->plan_id)) {
      best = &plans[i];
      best_score = s;
    }
  }
  return *best;
}

// ---------------------------------------------------------------------------
// Feedback

std::string_view to_string(FeedbackSource s) {
  switch (s) {
    case FeedbackSource::Human: return "human";
    case FeedbackSource::Tool: return "tool";
    case FeedbackSource::Sibling: return "sibling";
  }
  return "tool";
}

std::string_view to_string(RevisionHint h) {
  switch (h) {
    case RevisionHint::Retry: return "retry";
    case RevisionHint::Proceed: return "proceed";
    case RevisionHint::Abort: return "abort";
  }
  return "proceed";
}

RevisionHint incorporate_feedback(const Feedback& feedback, const FeedbackLexicon& lexicon) {
  if (feedback.source == FeedbackSource::Human) {
    for (const auto& token : lexicon.abort_tokens) {
      if (!token.empty() && feedback.content.find(token) != std::string::npos) {
        return RevisionHint::Abort;
      }
    }
  }
  if (feedback.rating && *feedback.rating < lexicon.rating_threshold) return RevisionHint::Retry;
  if (feedback.source == FeedbackSource::Tool) {
    const std::string lowered = to_lower(feedback.content);
    for (const auto& token : lexicon.failure_tokens) {
      if (!token.empty() && lowered.find(to_lower(token)) != std::string::npos) {
        return RevisionHint::Retry;
      }
    }
  }
  return RevisionHint::Proceed;
}

}  // namespace umf::planning
