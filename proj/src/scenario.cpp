#include "umf/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace umf::scenario {

namespace {

using orchestration::ActiveCoreAgent;
using orchestration::CoreAgentDecl;
using orchestration::PassiveCoreAgent;

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::ScenarioInvalid, why); }

const Json& need(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) invalid(where + ": missing '" + key + "'");
  return obj.at(key);
}

std::string need_string(const Json& obj, const char* key, const std::string& where) {
  const Json& v = need(obj, key, where);
  if (!v.is_string()) invalid(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> strings(const Json& obj, const char* key) {
  std::vector<std::string> out;
  if (!obj.contains(key)) return out;
  for (const auto& v : obj.at(key)) out.push_back(v.get<std::string>());
  return out;
}

std::set<std::string> string_set(const Json& obj, const char* key) {
  const auto v = strings(obj, key);
  return {v.begin(), v.end()};
}

Args args_from(const Json& obj) {
  Args args;
  if (!obj.is_object()) return args;
  for (const auto& [k, v] : obj.items()) args.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
  return args;
}

std::map<std::string, std::string> string_map(const Json& obj) {
  std::map<std::string, std::string> out;
  if (!obj.is_object()) return out;
  for (const auto& [k, v] : obj.items()) out[k] = v.get<std::string>();
  return out;
}

ErrorCode error_code_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::ScenarioInvalid); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    if (to_string(code) == s) return code;
  }
  invalid("unknown error code '" + std::string(s) + "'");
}

EventKind event_kind(const Json& j, const char* key, const std::string& where) {
  const auto name = need_string(j, key, where);
  try {
    return event_kind_from_string(name);
  } catch (const Error&) {
    invalid(where + ": unknown event kind '" + name + "'");
  }
}

action::ToolBehavior tool_behavior(const std::string& kind, const Json& config, const std::string& where) {
  if (kind == "calculator") return action::make_calculator();
  if (kind == "translator") return action::make_translator(string_map(config.value("phrases", Json::object())));
  if (kind == "wiki") return action::make_wiki(need_string(config, "repository", where));
  if (kind == "remote_api") return action::make_remote_api();
  if (kind == "code_runner") return action::make_code_runner(string_map(config.value("results", Json::object())));
  if (kind == "calendar") return action::make_calendar(config.value("today", "2024-01-01"));
  if (kind == "env_set") return action::make_env_set();
  if (kind == "failing") {
    const std::string message = config.value("message", "tool failed");
    return [message](const std::string&, const Args&, action::ToolContext&) -> std::string {
      throw Error(ErrorCode::ToolFailure, message);
    };
  }
  if (kind == "constant") {
    const std::string output = config.value("output", "");
    return [output](const std::string&, const Args&, action::ToolContext&) { return output; };
  }
  invalid(where + ": unknown tool kind '" + kind + "'");
}

security::Policy parse_policy(const Json& j) {
  security::Policy p;
  p.policy_id = need_string(j, "policy_id", "policy");
  p.deny_patterns = strings(j, "deny_patterns");
  p.canonical_forms = strings(j, "canonical_forms");
  p.jaccard_threshold = j.value("jaccard_threshold", 0.8);
  p.secrets = strings(j, "secrets");
  p.blocked_categories = string_set(j, "blocked_categories");
  p.mode = security::mode_from_string(j.value("mode", "rule_based"));
  security::validate_policy(p);
  return p;
}

profile::Profile parse_profile(const Json& j) {
  profile::Profile p;
  p.profile_id = need_string(j, "profile_id", "profile");
  p.method = profile::method_from_string(j.value("method", "handcrafted_icl"));
  if (j.contains("system_text")) p.system_text = j["system_text"].get<std::string>();
  if (j.contains("adapter_tag")) p.adapter_tag = j["adapter_tag"].get<std::string>();
  if (j.contains("source_record")) p.source_record = j["source_record"];
  p.applies_to = string_set(j, "applies_to");
  profile::validate_profile(p);
  return p;
}

planning::Operator parse_operator(const Json& j, const std::string& where) {
  planning::Operator op;
  op.name = need_string(j, "name", where);
  op.preconditions = string_set(j, "pre");
  op.add_effects = string_set(j, "add");
  op.del_effects = string_set(j, "del");
  if (j.contains("tool")) op.tool_id = j["tool"].get<std::string>();
  op.args = args_from(j.value("args", Json::object()));
  return op;
}

orchestration::PlanningConfig parse_planning(const Json& j, const std::string& where) {
  orchestration::PlanningConfig cfg;
  const auto mode = j.value("mode", "non_iterative");
  if (mode == "iterative") {
    cfg.mode = planning::DecomposeMode::Iterative;
  } else if (mode != "non_iterative") {
    invalid(where + ": unknown decomposition mode '" + mode + "'");
  }
  const std::size_t k = j.value("k", 1);
  cfg.strategy = k > 1 ? planning::Strategy::multi_path(k) : planning::Strategy::single_path();
  const auto technique = j.value("technique", "lm_powered");
  if (technique == "rule_based") {
    cfg.rule_based = true;
  } else if (technique != "lm_powered") {
    invalid(where + ": unknown technique '" + technique + "'");
  }
  for (const auto& op : j.value("operators", Json::array())) cfg.operators.push_back(parse_operator(op, where));
  cfg.max_depth = j.value("max_depth", 6);
  cfg.max_retries = j.value("max_retries", 1);
  cfg.max_iterations = j.value("max_iterations", 8);
  if (j.contains("failure_tokens")) cfg.lexicon.failure_tokens = strings(j, "failure_tokens");
  return cfg;
}

planning::TaskSpec parse_task(const Json& j) {
  planning::TaskSpec t;
  t.task_id = need_string(j, "task_id", "task");
  t.goal_text = need_string(j, "goal", t.task_id);
  t.domain_tags = string_set(j, "domains");
  t.facts = string_set(j, "facts");
  if (j.contains("goal_atoms")) t.goal_atoms = string_set(j, "goal_atoms");
  return t;
}

std::vector<Predicate> parse_where(const Json& j, const std::string& where) {
  std::vector<Predicate> out;
  if (!j.contains("where")) return out;
  const Json& w = j["where"];
  if (w.is_object()) {
    for (const auto& [k, v] : w.items()) out.push_back(Predicate{k, v});
  } else if (w.is_array()) {
    for (const auto& item : w) {
      const auto text = item.get<std::string>();
      const auto eq = text.find('=');
      if (eq == std::string::npos) invalid(where + ": predicate '" + text + "' lacks '='");
      out.push_back(Predicate{text.substr(0, eq), text.substr(eq + 1)});
    }
  } else {
    invalid(where + ": 'where' must be an object or a list of field=value strings");
  }
  for (const auto& p : out) {
    const bool known = p.field == "seq" || p.field == "tick" || p.field == "kind" || p.field == "actor" ||
                       p.field.rfind("payload.", 0) == 0;
    if (!known) invalid(where + ": predicate field '" + p.field + "' is not a trace event field");
  }
  return out;
}

AssertionSpec parse_assertion(const Json& j, std::size_t index) {
  const std::string where = "assertion " + std::to_string(index);
  AssertionSpec a;
  const auto kind = need_string(j, "kind", where);
  a.description = j.value("description", kind);
  if (kind == "event_count") {
    a.kind = AssertionKind::EventCount;
    a.event = event_kind(j, "event", where);
    if (j.contains("min")) a.min = j["min"].get<std::size_t>();
    if (j.contains("max")) a.max = j["max"].get<std::size_t>();
  } else if (kind == "event_order") {
    a.kind = AssertionKind::EventOrder;
    a.before = event_kind(j, "before", where);
    a.after = event_kind(j, "after", where);
  } else if (kind == "forbid_substring_in_external_payload") {
    a.kind = AssertionKind::ForbidSubstringInExternalPayload;
    a.text = need_string(j, "text", where);
    if (a.text.empty()) invalid(where + ": empty forbidden text");
  } else if (kind == "require_event") {
    a.kind = AssertionKind::RequireEvent;
    a.event = event_kind(j, "event", where);
  } else if (kind == "forbid_event") {
    a.kind = AssertionKind::ForbidEvent;
    a.event = event_kind(j, "event", where);
  } else {
    invalid(where + ": unknown assertion kind '" + kind + "'");
  }
  a.where = parse_where(j, where);
  return a;
}

const Json* lookup(const TraceEvent& e, const std::string& field, Json& scratch) {
  if (field == "seq") return &(scratch = e.seq);
  if (field == "tick") return &(scratch = e.tick);
  if (field == "kind") return &(scratch = std::string(to_string(e.kind)));
  if (field == "actor") return &(scratch = e.actor);
  const Json* cur = &e.payload;
  std::string_view rest = std::string_view(field).substr(std::string_view("payload.").size());
  while (!rest.empty()) {
    const auto dot = rest.find('.');
    const std::string key(rest.substr(0, dot));
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    rest = dot == std::string_view::npos ? std::string_view() : rest.substr(dot + 1);
  }
  return cur;
}

std::vector<const TraceEvent*> matching(const std::vector<TraceEvent>& events, EventKind kind,
                                        const std::vector<Predicate>& where) {
  std::vector<const TraceEvent*> out;
  for (const auto& e : events) {
    if (e.kind != kind) continue;
    const bool ok = std::all_of(where.begin(), where.end(),
                                [&](const Predicate& p) { return predicate_holds(e, p); });
    if (ok) out.push_back(&e);
  }
  return out;
}

}  // namespace

std::string_view to_string(AssertionKind k) {
  switch (k) {
    case AssertionKind::EventCount: return "event_count";
    case AssertionKind::EventOrder: return "event_order";
    case AssertionKind::ForbidSubstringInExternalPayload: return "forbid_substring_in_external_payload";
    case AssertionKind::RequireEvent: return "require_event";
    case AssertionKind::ForbidEvent: return "forbid_event";
  }
  return "event_count";
}

bool predicate_holds(const TraceEvent& event, const Predicate& p) {
  Json scratch;
  const Json* actual = lookup(event, p.field, scratch);
  if (actual == nullptr) return false;
  if (*actual == p.value) return true;
  // "field=value" strings compare against the JSON text of non-string fields.
  if (p.value.is_string() && !actual->is_string()) return actual->dump() == p.value.get<std::string>();
  return false;
}

std::vector<AssertionResult> check_assertions(const std::vector<TraceEvent>& events,
                                              const std::vector<AssertionSpec>& assertions) {
  std::vector<AssertionResult> out;
  for (const auto& a : assertions) {
    AssertionResult r{a.description, a.kind, false, ""};
    switch (a.kind) {
      case AssertionKind::EventCount: {
        const auto n = matching(events, a.event, a.where).size();
        r.passed = (!a.min || n >= *a.min) && (!a.max || n <= *a.max);
        r.detail = std::string(to_string(a.event)) + " count " + std::to_string(n);
        break;
      }
      case AssertionKind::EventOrder: {
        const auto firsts = matching(events, a.before, a.where);
        const auto seconds = matching(events, a.after, {});
        if (firsts.empty()) {
          r.detail = std::string(to_string(a.before)) + " never occurs";
        } else if (!seconds.empty() && seconds.front()->seq < firsts.front()->seq) {
          r.detail = std::string(to_string(a.after)) + " at seq " + std::to_string(seconds.front()->seq) +
                     " precedes " + std::string(to_string(a.before)) + " at seq " +
                     std::to_string(firsts.front()->seq);
        } else {
          r.passed = true;
          r.detail = std::string(to_string(a.before)) + " first at seq " + std::to_string(firsts.front()->seq);
        }
        break;
      }
      case AssertionKind::ForbidSubstringInExternalPayload: {
        std::size_t scanned = 0;
        r.passed = true;
        for (const auto& e : events) {
          if (e.kind != EventKind::ToolPayloadDelivered) continue;
          if (!e.payload.value("external", false)) continue;
          ++scanned;
          if (e.payload.value("payload", "").find(a.text) != std::string::npos) {
            r.passed = false;
            r.detail = "found in delivery seq " + std::to_string(e.seq);
            break;
          }
        }
        if (r.passed) r.detail = std::to_string(scanned) + " external deliveries clean";
        break;
      }
      case AssertionKind::RequireEvent: {
        const auto hits = matching(events, a.event, a.where);
        r.passed = !hits.empty();
        r.detail = hits.empty() ? "no matching " + std::string(to_string(a.event))
                                : "first match at seq " + std::to_string(hits.front()->seq);
        break;
      }
      case AssertionKind::ForbidEvent: {
        const auto hits = matching(events, a.event, a.where);
        r.passed = hits.empty();
        r.detail = hits.empty() ? "none found" : "match at seq " + std::to_string(hits.front()->seq);
        break;
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> check_invariants(const std::vector<TraceEvent>& events,
                                          const std::set<std::string>& passive_ids) {
  std::vector<std::string> out;
  std::set<std::string> privacy_verdicts;
  std::map<std::string, std::size_t> open_tasks;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.seq != i) out.push_back("seq gap at index " + std::to_string(i));
    switch (e.kind) {
      case EventKind::HumanMsg:
        if (passive_ids.count(e.payload.value("recipient", ""))) {
          out.push_back("human_msg to passive core-agent at seq " + std::to_string(e.seq));
        }
        break;
      case EventKind::GuardrailVerdict:
        if (e.payload.value("axis", "") == "privacy" && e.payload.contains("correlation")) {
          privacy_verdicts.insert(e.payload["correlation"].get<std::string>());
        }
        break;
      case EventKind::ToolPayloadDelivered:
        if (e.payload.value("external", false) &&
            !privacy_verdicts.count(e.payload.value("correlation", ""))) {
          out.push_back("external delivery without privacy verdict at seq " + std::to_string(e.seq));
        }
        break;
      case EventKind::TaskReceived:
        ++open_tasks[e.payload.value("task_id", "")];
        break;
      case EventKind::TaskDone: {
        auto it = open_tasks.find(e.payload.value("task_id", ""));
        if (it == open_tasks.end() || it->second == 0) {
          out.push_back("task_done without task_received at seq " + std::to_string(e.seq));
        } else {
          --it->second;
        }
        break;
      }
      default:
        break;
    }
  }
  for (const auto& [task, n] : open_tasks) {
    if (n != 0) out.push_back("task '" + task + "' never reached task_done");
  }
  return out;
}

ScenarioSpec parse_scenario(const Json& doc) {
  if (!doc.is_object()) invalid("scenario must be a JSON object");
  ScenarioSpec spec;
  spec.scenario_id = need_string(doc, "scenario_id", "scenario");
  spec.description = doc.value("description", "");
  spec.seed = doc.value("seed", std::uint64_t{1});
  if (doc.contains("expect_error")) spec.expect_error = error_code_from_string(doc["expect_error"].get<std::string>());

  auto resources = std::make_shared<orchestration::Resources>();

  const Json models = doc.value("models", Json::object());
  for (const auto& [model_id, rules] : models.items()) {
    std::vector<ScriptRule> script;
    for (const auto& r : rules) {
      ScriptRule rule;
      rule.id = r.value("id", "");
      rule.match = r.value("match", "*");
      if (r.contains("adapter_tag")) rule.required_adapter_tag = r["adapter_tag"].get<std::string>();
      rule.responses = strings(r, "responses");
      if (rule.responses.empty() && r.contains("response")) rule.responses.push_back(r["response"].get<std::string>());
      script.push_back(std::move(rule));
    }
    resources->models.emplace(model_id, ScriptedModel(std::move(script)));
  }

  const Json repositories = doc.value("repositories", Json::object());
  for (const auto& [repo_id, passages] : repositories.items()) {
    std::vector<std::string> texts;
    for (const auto& p : passages) texts.push_back(p.get<std::string>());
    resources->repositories.emplace(repo_id, action::Repository(std::move(texts)));
  }

  for (const auto& t : doc.value("tools", Json::array())) {
    action::Tool tool;
    tool.spec.tool_id = need_string(t, "tool_id", "tool");
    const std::string where = "tool '" + tool.spec.tool_id + "'";
    tool.spec.domains = string_set(t, "domains");
    tool.spec.external = t.value("external", false);
    tool.spec.arg_names = strings(t, "arg_names");
    tool.spec.mutates_environment = t.value("mutates_environment", false);
    const auto config = t.value("config", Json::object());
    const auto kind = need_string(t, "kind", where);
    if (kind == "wiki" && !resources->repositories.count(need_string(config, "repository", where))) {
      invalid(where + ": unknown repository '" + config["repository"].get<std::string>() + "'");
    }
    tool.behavior = tool_behavior(kind, config, where);
    resources->tools.add(std::move(tool));
  }

  std::map<std::string, security::Policy> policies;
  for (const auto& p : doc.value("policies", Json::array())) {
    auto policy = parse_policy(p);
    const auto id = policy.policy_id;
    if (!policies.emplace(id, std::move(policy)).second) invalid("duplicate policy '" + id + "'");
  }
  std::map<std::string, profile::Profile> profiles;
  for (const auto& p : doc.value("profiles", Json::array())) {
    auto prof = parse_profile(p);
    const auto id = prof.profile_id;
    if (!profiles.emplace(id, std::move(prof)).second) invalid("duplicate profile '" + id + "'");
  }
  auto policy_ref = [&](const std::string& id, const std::string& where) {
    auto it = policies.find(id);
    if (it == policies.end()) invalid(where + ": unknown policy '" + id + "'");
    return it->second;
  };
  auto profile_ref = [&](const std::string& id, const std::string& where) {
    auto it = profiles.find(id);
    if (it == profiles.end()) invalid(where + ": unknown profile '" + id + "'");
    return it->second;
  };
  auto model_ref = [&](const std::string& id, const std::string& where) {
    if (!resources->models.count(id)) invalid(where + ": unknown model '" + id + "'");
  };

  auto& topo = spec.topology;
  for (const auto& c : need(doc, "core_agents", "scenario")) {
    CoreAgentDecl decl;
    decl.id = need_string(c, "id", "core agent");
    const std::string where = "core agent '" + decl.id + "'";
    const auto kind = need_string(c, "kind", where);
    if (kind == "active") {
      decl.kind = CoreAgentKind::Active;
    } else if (kind == "passive") {
      decl.kind = CoreAgentKind::Passive;
    } else {
      invalid(where + ": unknown kind '" + kind + "'");
    }
    decl.domains = string_set(c, "domains");
    decl.model = c.value("model", "");
    if (!decl.model.empty()) model_ref(decl.model, where);
    decl.guard_model = c.value("guard_model", "");
    if (!decl.guard_model.empty()) model_ref(decl.guard_model, where);
    if (c.contains("planning")) decl.planning = parse_planning(c["planning"], where);
    if (c.contains("memory")) {
      const auto& m = c["memory"];
      decl.memory = orchestration::MemoryConfig{memory::location_from_string(m.value("location", "embedded")),
                                                m.value("capacity", std::size_t{32})};
    }
    for (const auto& pid : strings(c, "profiles")) decl.profiles.push_back(profile_ref(pid, where));
    decl.tools = strings(c, "tools");
    for (const auto& tid : decl.tools) {
      if (!resources->tools.find(tid)) invalid(where + ": unknown tool '" + tid + "'");
    }
    if (c.contains("security")) decl.security = policy_ref(c["security"].get<std::string>(), where);
    decl.respond_candidates = c.value("respond_candidates", std::size_t{1});
    decl.capacity = c.value("capacity", std::size_t{4});

    auto agent = orchestration::build_core_agent(std::move(decl));
    if (auto* a = std::get_if<ActiveCoreAgent>(&agent)) {
      topo.actives.push_back(std::move(*a));
    } else {
      topo.passives.push_back(std::move(std::get<PassiveCoreAgent>(agent)));
    }
  }

  const Json& t = need(doc, "topology", "scenario");
  topo.architecture = orchestration::architecture_from_string(need_string(t, "architecture", "topology"));
  if (t.contains("attached")) {
    topo.attached = string_set(t, "attached");
    for (const auto& id : topo.attached) {
      const bool known = std::any_of(topo.passives.begin(), topo.passives.end(),
                                     [&](const auto& p) { return p.id == id; });
      if (!known) invalid("topology: attached id '" + id + "' is not a passive core-agent");
    }
  } else {
    for (const auto& p : topo.passives) topo.attached.insert(p.id);
  }
  topo.front_model = t.value("front_model", "");
  if (!topo.front_model.empty()) model_ref(topo.front_model, "topology");
  for (const auto& pid : strings(t, "front_profiles")) topo.front_profiles.push_back(profile_ref(pid, "topology"));
  topo.wiring = orchestration::wiring_from_string(t.value("wiring", "direct"));
  topo.coordination = orchestration::coordination_from_string(t.value("coordination", "raft"));

  auto& rt = spec.runtime;
  rt.step_limit = doc.value("step_limit", orchestration::kDefaultStepLimit);
  if (t.contains("election")) {
    const auto& e = t["election"];
    rt.election_net.drop_prob = e.value("drop_prob", 0.0);
    rt.election_net.delay_min = e.value("delay_min", std::uint64_t{1});
    rt.election_net.delay_max = e.value("delay_max", std::uint64_t{2});
    rt.election_max_ticks = e.value("max_ticks", std::uint64_t{200});
  }
  rt.gateway_ttl = t.value("gateway_ttl", orchestration::kDefaultGatewayTtl);
  rt.election_seed = spec.seed;

  std::set<std::string> task_ids;
  for (const auto& s : need(doc, "tasks", "scenario")) {
    if (s.contains("control")) {
      Control c;
      const auto op = need_string(s, "control", "control step");
      if (op == "attach") {
        c.op = Control::Op::Attach;
      } else if (op == "detach") {
        c.op = Control::Op::Detach;
      } else {
        invalid("unknown control '" + op + "'");
      }
      c.passive_id = need_string(s, "passive", "control step");
      spec.steps.emplace_back(std::move(c));
    } else {
      auto task = parse_task(s);
      if (!task_ids.insert(task.task_id).second) invalid("duplicate task '" + task.task_id + "'");
      spec.steps.emplace_back(std::move(task));
    }
  }

  const auto assertions = doc.value("assertions", Json::array());
  for (std::size_t i = 0; i < assertions.size(); ++i) spec.assertions.push_back(parse_assertion(assertions[i], i));

  orchestration::validate_topology(topo, *resources);
  spec.resources = std::move(resources);
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ScenarioInvalid, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const Json doc = Json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::ParseError, "'" + path + "' is not valid JSON");
  return parse_scenario(doc);
}

bool ScenarioRun::passed(const ScenarioSpec& spec) const {
  if (error_code && error_code != spec.expect_error) return false;
  if (!error_code && spec.expect_error) return false;
  return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
}

ScenarioRun run_scenario(const ScenarioSpec& spec, std::optional<std::uint64_t> seed) {
  ScenarioRun run;
  run.scenario_id = spec.scenario_id;
  run.seed = seed.value_or(spec.seed);
  auto runtime = spec.runtime;
  runtime.election_seed = run.seed;

  std::optional<orchestration::Orchestrator> orch;
  try {
    orch.emplace(spec.topology, *spec.resources, runtime, run.trace);
    for (const auto& step : spec.steps) {
      if (const auto* task = std::get_if<planning::TaskSpec>(&step)) {
        run.outcomes.push_back(orch->run_task(*task));
      } else {
        const auto& c = std::get<Control>(step);
        if (c.op == Control::Op::Attach) {
          orch->attach(c.passive_id);
        } else {
          orch->detach(c.passive_id);
        }
      }
    }
  } catch (const Error& e) {
    run.error = e.what();
    run.error_code = e.code();
  }

  run.memory_dump = Json::object();
  if (orch) {
    for (const auto& a : orch->topology().actives) {
      if (a.memory) run.memory_dump[a.id] = a.memory->to_json();
    }
  }
  run.results = check_assertions(run.trace.events(), spec.assertions);
  return run;
}

Json to_json(const AssertionResult& r) {
  return Json{{"description", r.description},
              {"kind", to_string(r.kind)},
              {"passed", r.passed},
              {"detail", r.detail}};
}

}  // namespace umf::scenario
