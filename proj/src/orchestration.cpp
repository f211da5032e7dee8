#include "umf/orchestration.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <utility>

namespace umf::orchestration {

namespace {

constexpr std::array<std::pair<Architecture, std::string_view>, 6> kArchitectureNames{{
    {Architecture::SingleActive, "single_active"},
    {Architecture::SinglePassive, "single_passive"},
    {Architecture::UniformPassive, "uniform_passive"},
    {Architecture::UniformActive, "uniform_active"},
    {Architecture::HybridOneActive, "hybrid_one_active"},
    {Architecture::ManyActiveManyPassive, "many_active_many_passive"},
}};

Json args_json(const Args& args) {
  Json j = Json::object();
  for (const auto& [k, v] : args) j[k] = v;
  return j;
}

Json with_fields(Json base, std::initializer_list<std::pair<const char*, Json>> extra) {
  for (const auto& [k, v] : extra) base[k] = v;
  return base;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// Plan-step argument values may reference the task goal as "{goal}".
Args bind_task_args(Args args, const planning::TaskSpec& task) {
  static constexpr std::string_view kGoal = "{goal}";
  for (auto& [name, value] : args) {
    for (auto pos = value.find(kGoal); pos != std::string::npos;
         pos = value.find(kGoal, pos + task.goal_text.size())) {
      value.replace(pos, kGoal.size(), task.goal_text);
    }
  }
  return args;
}

}  // namespace

std::string_view to_string(Architecture a) {
  for (const auto& [k, name] : kArchitectureNames) {
    if (k == a) return name;
  }
  return "single_active";
}

Architecture architecture_from_string(std::string_view s) {
  for (const auto& [k, name] : kArchitectureNames) {
    if (name == s) return k;
  }
  throw Error(ErrorCode::TopologyInvalid, "unknown architecture '" + std::string(s) + "'");
}

std::string_view to_string(Wiring w) { return w == Wiring::Direct ? "direct" : "via_model"; }

Wiring wiring_from_string(std::string_view s) {
  if (s == "direct") return Wiring::Direct;
  if (s == "via_model") return Wiring::ViaModel;
  throw Error(ErrorCode::TopologyInvalid, "unknown wiring '" + std::string(s) + "'");
}

std::string_view to_string(Coordination c) { return c == Coordination::Raft ? "raft" : "gateway"; }

Coordination coordination_from_string(std::string_view s) {
  if (s == "raft") return Coordination::Raft;
  if (s == "gateway") return Coordination::Gateway;
  throw Error(ErrorCode::TopologyInvalid, "unknown coordination '" + std::string(s) + "'");
}

ModuleMatrix ActiveCoreAgent::matrix() const {
  ModuleMatrix m;
  m.planning = Presence::Present;
  m.profile = profiles.empty() ? Presence::Absent : Presence::Present;
  m.memory = memory ? Presence::Present : Presence::Absent;
  m.action = Presence::Present;
  m.security = security ? Presence::Present : Presence::Absent;
  return m;
}

ModuleMatrix PassiveCoreAgent::matrix() const {
  ModuleMatrix m;
  m.action = Presence::Present;
  m.security = security ? Presence::Present : Presence::Absent;
  return m;
}

CoreAgent build_core_agent(CoreAgentDecl decl) {
  if (decl.id.empty()) throw Error(ErrorCode::InvalidCoreAgent, "core-agent needs an id");
  if (decl.security) security::validate_policy(*decl.security);

  switch (decl.kind) {
    case CoreAgentKind::NotAnAgent:
      throw Error(ErrorCode::InvalidCoreAgent, "'" + decl.id + "' declares no modules");
    case CoreAgentKind::Passive: {
      if (decl.planning || decl.memory || !decl.profiles.empty()) {
        throw Error(ErrorCode::InvalidCoreAgent,
                    "passive core-agent '" + decl.id + "' cannot carry planning, memory or a profile");
      }
      if (decl.tools.empty()) {
        throw Error(ErrorCode::InvalidCoreAgent, "passive core-agent '" + decl.id + "' owns no tools");
      }
      return PassiveCoreAgent{std::move(decl.id), std::move(decl.domains), std::move(decl.tools),
                              std::move(decl.security)};
    }
    case CoreAgentKind::Active:
      break;
  }

  if (!decl.planning) {
    throw Error(ErrorCode::InvalidCoreAgent, "active core-agent '" + decl.id + "' needs planning");
  }
  if (decl.model.empty()) {
    throw Error(ErrorCode::InvalidCoreAgent, "active core-agent '" + decl.id + "' needs a model");
  }
  if (decl.respond_candidates == 0 || decl.capacity == 0) {
    throw Error(ErrorCode::InvalidCoreAgent,
                "'" + decl.id + "' needs respond_candidates and capacity of at least 1");
  }
  for (const auto& op : decl.planning->operators) planning::validate_operator(op);
  for (const auto& p : decl.profiles) profile::validate_profile(p);

  ActiveCoreAgent a;
  a.id = std::move(decl.id);
  a.domains = std::move(decl.domains);
  a.model = std::move(decl.model);
  a.planning = std::move(*decl.planning);
  if (decl.memory) a.memory.emplace(decl.memory->location, decl.memory->capacity);
  a.profiles = std::move(decl.profiles);
  a.tools = std::move(decl.tools);
  a.security = std::move(decl.security);
  a.guard_model = std::move(decl.guard_model);
  a.respond_candidates = decl.respond_candidates;
  a.capacity = decl.capacity;
  return a;
}

void validate_topology(const Topology& t, const Resources& resources) {
  const std::size_t na = t.actives.size();
  const std::size_t np = t.passives.size();
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::TopologyInvalid, std::string(to_string(t.architecture)) + ": " + why);
  };

  switch (t.architecture) {
    case Architecture::SingleActive:
      if (na != 1 || np != 0) fail("needs exactly one active and no passive core-agent");
      break;
    case Architecture::SinglePassive:
      if (na != 0 || np != 1) fail("needs exactly one passive and no active core-agent");
      break;
    case Architecture::UniformPassive:
      if (na != 0 || np == 0) fail("needs passive core-agents only");
      break;
    case Architecture::UniformActive:
      if (na < 2 || np != 0) fail("needs two or more active and no passive core-agents");
      break;
    case Architecture::HybridOneActive:
      if (na != 1 || np == 0) fail("needs exactly one active and at least one passive core-agent");
      break;
    case Architecture::ManyActiveManyPassive:
      if (na < 2 || np == 0) fail("needs two or more active and at least one passive core-agent");
      break;
  }

  std::set<std::string> ids;
  std::map<std::string, std::string> tool_owner;
  auto claim = [&](const std::string& agent, const std::vector<std::string>& tools) {
    if (!ids.insert(agent).second) fail("duplicate core-agent id '" + agent + "'");
    for (const auto& tool : tools) {
      if (resources.tools.find(tool) == nullptr) fail("'" + agent + "' owns unknown tool '" + tool + "'");
      auto [it, fresh] = tool_owner.emplace(tool, agent);
      if (!fresh) fail("tool '" + tool + "' owned by both '" + it->second + "' and '" + agent + "'");
    }
  };
  for (const auto& a : t.actives) {
    claim(a.id, a.tools);
    if (resources.models.find(a.model) == resources.models.end()) {
      fail("'" + a.id + "' is bound to unknown model '" + a.model + "'");
    }
    if (!a.guard_model.empty() && resources.models.find(a.guard_model) == resources.models.end()) {
      fail("'" + a.id + "' guard uses unknown model '" + a.guard_model + "'");
    }
  }
  for (const auto& p : t.passives) claim(p.id, p.tools);

  for (const auto& id : t.attached) {
    const bool known = std::any_of(t.passives.begin(), t.passives.end(),
                                   [&](const auto& p) { return p.id == id; });
    if (!known) fail("attached id '" + id + "' is not a passive core-agent");
  }
  if (na == 0 && resources.models.find(t.front_model) == resources.models.end()) {
    fail("passive topology needs a known front model, got '" + t.front_model + "'");
  }
  for (const auto& p : t.front_profiles) profile::validate_profile(p);
}

// ---------------------------------------------------------------------------

class TracedModel final : public ModelPort {
 public:
  TracedModel(Orchestrator& orchestrator, std::string actor, std::string model,
              const profile::Profile* profile, std::string phase)
      : orchestrator_(&orchestrator),
        actor_(std::move(actor)),
        model_(std::move(model)),
        profile_(profile),
        phase_(std::move(phase)) {}

  ModelResponse complete(const ModelRequest& request) const override {
    return orchestrator_->call_model(actor_, model_, profile_, nullptr, request, phase_);
  }

 private:
  Orchestrator* orchestrator_;
  std::string actor_;
  std::string model_;
  const profile::Profile* profile_;
  std::string phase_;
};

namespace {

class TraceObserver final : public action::ActionObserver {
 public:
  using Emit = std::function<void(EventKind, const std::string&, Json)>;

  TraceObserver(Emit emit, std::string guard_actor, std::string owner, std::string msg_id)
      : emit_(std::move(emit)),
        guard_actor_(std::move(guard_actor)),
        owner_(std::move(owner)),
        msg_id_(std::move(msg_id)) {}

  void on_egress_verdict(const ToolSpec& spec, const std::string&,
                         const security::Verdict& verdict) override {
    emit_(EventKind::GuardrailVerdict, guard_actor_,
          with_fields(security::to_json(verdict), {{"correlation", msg_id_}, {"tool", spec.tool_id}}));
  }

  void on_delivery(const ToolSpec& spec, const std::string& payload) override {
    emit_(EventKind::ToolPayloadDelivered, owner_,
          Json{{"tool", spec.tool_id},
               {"external", spec.external},
               {"payload", payload},
               {"correlation", msg_id_}});
  }

 private:
  Emit emit_;
  std::string guard_actor_;
  std::string owner_;
  std::string msg_id_;
};

}  // namespace

Orchestrator::Orchestrator(Topology topology, const Resources& resources, RuntimeConfig config,
                           Trace& trace)
    : topology_(std::move(topology)), resources_(resources), config_(config), trace_(trace) {
  validate_topology(topology_, resources_);
  setup();
}

std::uint64_t Orchestrator::emit(EventKind kind, const std::string& actor, Json payload) {
  return trace_.append(tick_, kind, actor, std::move(payload));
}

void Orchestrator::count_step() {
  ++tick_;
  if (++steps_ > config_.step_limit) {
    throw Error(ErrorCode::StepLimitExceeded,
                "task exceeded " + std::to_string(config_.step_limit) + " steps");
  }
}

bool Orchestrator::passive_only() const { return topology_.actives.empty(); }

void Orchestrator::setup() {
  if (passive_only()) {
    for (const auto& p : topology_.front_profiles) {
      emit(EventKind::ProfileSet, "orchestrator",
           Json{{"profile_id", p.profile_id},
                {"method", profile::to_string(p.method)},
                {"model", topology_.front_model},
                {"phase", "static"}});
    }
    emit(EventKind::Warning, "orchestrator",
         Json{{"code", "no_prompt_safeguard"},
              {"message", "model front runs without prompt or response safeguarding"}});
  }

  const bool centralized =
      !passive_only() && std::all_of(topology_.actives.begin(), topology_.actives.end(),
                                     [](const auto& a) { return a.security.has_value(); });
  std::vector<std::string> unguarded;
  auto scan = [&](const std::vector<std::string>& tools, bool own_guard) {
    for (const auto& id : tools) {
      if (resources_.tools.at(id).spec.external && !centralized && !own_guard) unguarded.push_back(id);
    }
  };
  for (const auto& a : topology_.actives) scan(a.tools, a.security.has_value());
  for (const auto& p : topology_.passives) {
    if (topology_.attached.count(p.id)) scan(p.tools, p.security.has_value());
  }
  if (!unguarded.empty()) {
    emit(EventKind::Warning, "orchestrator",
         Json{{"code", "privacy_gap"},
              {"message", "no egress safeguard configured"},
              {"tools", unguarded}});
  }

  if (topology_.actives.size() < 2) return;
  if (topology_.coordination == Coordination::Raft) {
    const auto run = consensus::run_election(topology_.actives.size(), config_.election_net,
                                             config_.election_seed, config_.election_max_ticks);
    if (!run.leader) {
      throw Error(ErrorCode::ElectionTimeout,
                  "no leader within " + std::to_string(config_.election_max_ticks) + " ticks");
    }
    const std::size_t index = std::stoul(run.leader->node_id.substr(1));
    leader_ = topology_.actives.at(index).id;
    tick_ += run.ticks_elapsed;
    Json candidates = Json::array();
    for (const auto& a : topology_.actives) candidates.push_back(a.id);
    emit(EventKind::LeaderElected, *leader_,
         Json{{"leader", *leader_},
              {"node", run.leader->node_id},
              {"term", run.leader->term},
              {"ticks", run.ticks_elapsed},
              {"candidates", candidates}});
  } else {
    gateway_.emplace(config_.gateway_ttl);
    gateway_->set_now(tick_);
    for (const auto& a : topology_.actives) {
      GatewayRegistration reg;
      reg.core_agent_id = a.id;
      reg.domains = a.domains;
      reg.capacity = a.capacity;
      gateway_->register_agent(std::move(reg));
    }
  }
}

std::set<std::string> Orchestrator::tool_inventory() const {
  std::set<std::string> out;
  for (const auto& a : topology_.actives) out.insert(a.tools.begin(), a.tools.end());
  for (const auto& p : topology_.passives) {
    if (topology_.attached.count(p.id)) out.insert(p.tools.begin(), p.tools.end());
  }
  return out;
}

ActiveCoreAgent* Orchestrator::find_active(std::string_view id) {
  for (auto& a : topology_.actives) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

void Orchestrator::attach(const std::string& passive_id) {
  const auto it = std::find_if(topology_.passives.begin(), topology_.passives.end(),
                               [&](const auto& p) { return p.id == passive_id; });
  if (it == topology_.passives.end()) {
    throw Error(ErrorCode::UnknownPassiveAgent, "'" + passive_id + "' is not in the inventory");
  }
  if (!topology_.attached.insert(passive_id).second) {
    throw Error(ErrorCode::AlreadyAttached, "'" + passive_id + "' is already attached");
  }
  const std::string actor = leader_.value_or(topology_.actives.empty() ? "orchestrator"
                                                                        : topology_.actives.front().id);
  emit(EventKind::Attach, actor, Json{{"passive", passive_id}, {"tools", it->tools}});
}

void Orchestrator::detach(const std::string& passive_id) {
  const auto it = std::find_if(topology_.passives.begin(), topology_.passives.end(),
                               [&](const auto& p) { return p.id == passive_id; });
  if (it == topology_.passives.end()) {
    throw Error(ErrorCode::UnknownPassiveAgent, "'" + passive_id + "' is not in the inventory");
  }
  if (topology_.attached.erase(passive_id) == 0) {
    throw Error(ErrorCode::NotAttached, "'" + passive_id + "' is not attached");
  }
  const std::string actor = leader_.value_or(topology_.actives.empty() ? "orchestrator"
                                                                        : topology_.actives.front().id);
  emit(EventKind::Detach, actor, Json{{"passive", passive_id}, {"tools", it->tools}});
}

ModelResponse Orchestrator::call_model(const std::string& actor, const std::string& model_id,
                                       const profile::Profile* profile,
                                       const std::vector<profile::Profile>* extra,
                                       ModelRequest request, std::string_view phase) {
  if (extra) {
    for (const auto& p : *extra) request = profile::apply_profile(p, std::move(request));
  }
  if (profile) {
    request = profile::apply_profile(*profile, std::move(request));
    emit(EventKind::ProfileSet, actor,
         Json{{"profile_id", profile->profile_id},
              {"method", profile::to_string(profile->method)},
              {"model", model_id},
              {"phase", phase}});
  }
  count_step();
  const auto it = resources_.models.find(model_id);
  if (it == resources_.models.end()) {
    throw Error(ErrorCode::TopologyInvalid, "unknown model '" + model_id + "'");
  }
  ModelResponse resp = it->second.complete(request);
  emit(EventKind::ModelCall, actor,
       Json{{"model", model_id},
            {"phase", phase},
            {"prompt", request.prompt},
            {"system_prefix", request.system_prefix ? Json(*request.system_prefix) : Json()},
            {"adapter_tags", request.adapter_tags},
            {"candidates", resp.candidates},
            {"rule", resp.source}});
  return resp;
}

std::optional<Orchestrator::Owner> Orchestrator::owner_of(std::string_view tool_id) {
  for (auto& a : topology_.actives) {
    if (std::find(a.tools.begin(), a.tools.end(), tool_id) != a.tools.end()) {
      return Owner{a.id, &a, nullptr};
    }
  }
  for (const auto& p : topology_.passives) {
    if (!topology_.attached.count(p.id)) continue;
    if (std::find(p.tools.begin(), p.tools.end(), tool_id) != p.tools.end()) {
      return Owner{p.id, nullptr, &p};
    }
  }
  return std::nullopt;
}

const security::Policy* Orchestrator::guard_for(const Owner& owner,
                                                const ActiveCoreAgent* orchestrator) const {
  if (orchestrator && orchestrator->security) return &*orchestrator->security;
  if (owner.active && owner.active->security) return &*owner.active->security;
  if (owner.passive && owner.passive->security) return &*owner.passive->security;
  return nullptr;
}

Orchestrator::Dispatch Orchestrator::dispatch_tool(const action::ActionRequest& request,
                                                   std::uint64_t origin_seq,
                                                   const std::string& requester,
                                                   ActiveCoreAgent* orchestrator,
                                                   const std::string& task_id) {
  const auto owner = owner_of(request.target);
  if (!owner) {
    throw Error(ErrorCode::UnknownTool, "no attached core-agent owns '" + request.target + "'");
  }
  count_step();
  const action::Tool& tool = resources_.tools.at(request.target);
  const Envelope env = ledger_.make(requester, owner->id, EnvelopeKind::ApiCallRequest,
                                    Json{{"tool", request.target}, {"args", args_json(request.args)}});
  Dispatch d;
  d.called_seq = emit(EventKind::ToolCalled, owner->id,
                      Json{{"tool", request.target},
                           {"task_id", task_id},
                           {"msg_id", env.msg_id},
                           {"origin_seq", origin_seq},
                           {"trigger", action::to_string(request.trigger)},
                           {"requested_by", requester},
                           {"external", tool.spec.external},
                           {"payload", action::serialize_args(request.args)}});

  const security::Policy* guard = guard_for(*owner, orchestrator);
  const std::string guard_actor =
      orchestrator && orchestrator->security ? orchestrator->id : owner->id;
  TraceObserver observer(
      [this](EventKind k, const std::string& actor, Json p) { emit(k, actor, std::move(p)); },
      guard_actor, owner->id, env.msg_id);

  action::ActionContext ctx;
  ctx.tools = &resources_.tools;
  ctx.guard = guard;
  ctx.memory = owner->active && owner->active->memory ? &*owner->active->memory : nullptr;
  ctx.task_id = task_id;
  ctx.tool_context = action::ToolContext{&environment_, &resources_.repositories};
  ctx.observer = &observer;

  auto result = action::execute_action(request, ctx);
  ledger_.make(owner->id, requester, EnvelopeKind::ToolResult,
               Json{{"tool", request.target}, {"output", result.output}}, env.msg_id);
  d.output = std::move(result.output);
  d.chained = std::move(result.chained_requests);
  return d;
}

std::string Orchestrator::dispatch_with_chain(const action::ActionRequest& request,
                                              std::uint64_t origin_seq,
                                              const std::string& requester,
                                              ActiveCoreAgent* orchestrator,
                                              const std::string& task_id) {
  Dispatch d = dispatch_tool(request, origin_seq, requester, orchestrator, task_id);
  std::vector<std::string> outputs{d.output};
  const std::string owner = owner_of(request.target)->id;
  for (const auto& next : d.chained) {
    const auto seq = emit(EventKind::InlineCallParsed, owner,
                          Json{{"tool", next.target},
                               {"args", args_json(next.args)},
                               {"source", "tool_output"},
                               {"origin_seq", d.called_seq}});
    outputs.push_back(dispatch_with_chain(next, seq, owner, orchestrator, task_id));
  }
  return join(outputs, "\n");
}

TaskOutcome Orchestrator::run_task(const planning::TaskSpec& task) {
  steps_ = 0;
  std::string actor = topology_.front_model;
  ActiveCoreAgent* agent = nullptr;
  try {
    if (passive_only()) return run_passive_task(task);
    agent = &orchestrator_for(task);
    actor = agent->id;
    auto outcome = run_active_task(*agent, task);
    if (gateway_) gateway_->release(agent->id);
    return outcome;
  } catch (const Error& e) {
    if (gateway_ && agent) gateway_->release(agent->id);
    const char* status = e.code() == ErrorCode::StepLimitExceeded ? "step_limit_exceeded" : "failed";
    emit(EventKind::TaskDone, actor,
         Json{{"task_id", task.task_id}, {"status", status}, {"error", e.what()}});
    throw;
  }
}

ActiveCoreAgent& Orchestrator::orchestrator_for(const planning::TaskSpec& task) {
  if (topology_.actives.size() == 1) return topology_.actives.front();
  if (leader_) return *find_active(*leader_);

  gateway_->set_now(tick_);
  for (const auto& reg : gateway_->registrations()) {
    if (reg.status != AgentStatus::Offline) {
      gateway_->heartbeat(reg.core_agent_id, reg.load, AgentStatus::Available);
    }
  }
  const std::string chosen = gateway_->route(task.domain_tags);
  const auto& reg = gateway_->registration(chosen);
  emit(EventKind::RouteSelected, "gateway",
       Json{{"core_agent", chosen},
            {"task_id", task.task_id},
            {"domains", task.domain_tags},
            {"load", reg.load}});
  return *find_active(chosen);
}

TaskOutcome Orchestrator::run_passive_task(const planning::TaskSpec& task) {
  const std::string& front = topology_.front_model;
  emit(EventKind::HumanMsg, "human",
       Json{{"recipient", front}, {"task_id", task.task_id}, {"text", task.goal_text}});
  emit(EventKind::TaskReceived, front, Json{{"task_id", task.task_id}, {"goal", task.goal_text}});

  std::string conversation = task.goal_text;
  std::string answer;
  while (true) {
    ModelRequest req;
    req.prompt = conversation;
    const auto resp = call_model(front, front, nullptr, &topology_.front_profiles, req, "respond");
    const std::string candidate = resp.candidates.empty() ? "" : resp.candidates.front();
    const auto calls = action::parse_inline_calls(candidate);
    if (calls.empty()) {
      answer = candidate;
      break;
    }
    for (const auto& call : calls) {
      const auto seq = emit(EventKind::InlineCallParsed, front,
                            Json{{"tool", call.tool_id},
                                 {"args", args_json(call.args)},
                                 {"source", "model_output"},
                                 {"span", Json::array({call.span.begin, call.span.end})}});
      action::ActionRequest req_call;
      req_call.trigger = action::Trigger::ApiCallRequest;
      req_call.target = call.tool_id;
      req_call.args = call.args;
      try {
        const auto out = dispatch_with_chain(req_call, seq, front, nullptr, task.task_id);
        conversation += "\n[RESULT " + call.tool_id + "] " + out;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ToolFailure && e.code() != ErrorCode::UnknownTool &&
            e.code() != ErrorCode::BlockedByPolicy) {
          throw;
        }
        conversation += "\n[ERROR " + call.tool_id + "] " + e.detail();
      }
    }
  }
  emit(EventKind::TaskDone, front,
       Json{{"task_id", task.task_id}, {"status", "completed"}, {"answer", answer}});
  return TaskOutcome{task.task_id, "completed", answer, front};
}

const profile::Profile* Orchestrator::select_profile(const ActiveCoreAgent& agent,
                                                     std::string_view phase,
                                                     const std::set<std::string>& tags) const {
  for (const auto& p : agent.profiles) {
    for (const auto& tag : tags) {
      if (p.applies_to.count(tag)) return &p;
    }
  }
  for (const auto& p : agent.profiles) {
    if (p.applies_to.count(std::string(phase))) return &p;
  }
  return nullptr;
}

TaskOutcome Orchestrator::run_active_task(ActiveCoreAgent& agent, const planning::TaskSpec& task) {
  emit(EventKind::HumanMsg, "human",
       Json{{"recipient", agent.id}, {"task_id", task.task_id}, {"text", task.goal_text}});
  emit(EventKind::TaskReceived, agent.id,
       Json{{"task_id", task.task_id}, {"goal", task.goal_text}, {"domains", task.domain_tags}});

  const std::string guard_model = agent.guard_model.empty() ? agent.model : agent.guard_model;
  TracedModel guard(*this, agent.id, guard_model, nullptr, "guard");
  auto finish = [&](const std::string& status, const std::string& answer, Json extra) {
    Json p{{"task_id", task.task_id}, {"status", status}, {"answer", answer}};
    for (auto& [k, v] : extra.items()) p[k] = v;
    emit(EventKind::TaskDone, agent.id, std::move(p));
    return TaskOutcome{task.task_id, status, answer, agent.id};
  };

  if (agent.security) {
    const auto v = security::check_prompt(task.goal_text, *agent.security, &guard);
    emit(EventKind::GuardrailVerdict, agent.id,
         with_fields(security::to_json(v), {{"task_id", task.task_id}}));
    if (v.decision == security::Decision::Block) {
      return finish("blocked", "", Json{{"reason", v.matched_rule.value_or("policy")}});
    }
  }

  if (agent.memory) {
    count_step();
    const auto hits = agent.memory->read(memory::BySimilarity{task.goal_text, 1});
    Json keys = Json::array();
    for (const auto& r : hits) keys.push_back(r.key);
    emit(EventKind::MemoryRead, agent.id,
         Json{{"query", "similarity"}, {"text", task.goal_text}, {"hits", keys}});
  }

  std::vector<std::pair<std::string, std::string>> results;
  planning::AtomSet world = task.facts;
  TracedModel decomposer(*this, agent.id, agent.model,
                         select_profile(agent, "decompose", task.domain_tags), "decompose");
  auto record = [&](const planning::Subtask& s) {
    emit(EventKind::Decomposition, agent.id,
         Json{{"task_id", task.task_id},
              {"subtask_id", s.subtask_id},
              {"ordinal", s.ordinal},
              {"goal", s.goal_text},
              {"depends_on", s.depends_on},
              {"tags", s.domain_tags}});
  };

  if (agent.planning.mode == planning::DecomposeMode::NonIterative) {
    const auto dec = planning::decompose(task, planning::DecomposeMode::NonIterative, {}, decomposer);
    for (const auto& s : dec.subtasks) record(s);
    for (const auto& s : dec.subtasks) {
      results.emplace_back(s.subtask_id, solve_subtask(agent, task, s, dec.subtasks.size(), world));
    }
  } else {
    for (std::size_t round = 0; round < agent.planning.max_iterations; ++round) {
      const auto dec =
          planning::decompose(task, planning::DecomposeMode::Iterative, results, decomposer);
      if (dec.done) break;
      for (const auto& s : dec.subtasks) {
        record(s);
        results.emplace_back(s.subtask_id, solve_subtask(agent, task, s, 0, world));
      }
    }
  }

  ModelRequest req;
  req.prompt = "RESPOND: " + task.goal_text;
  for (const auto& [sid, r] : results) req.prompt += "\n[RESULT " + sid + "] " + r;
  req.max_candidates = agent.respond_candidates;
  const auto resp = call_model(agent.id, agent.model,
                               select_profile(agent, "respond", task.domain_tags), nullptr, req,
                               "respond");

  std::string status = "completed";
  std::string answer;
  if (agent.security) {
    bool accepted = false;
    for (std::size_t i = 0; i < resp.candidates.size() && !accepted; ++i) {
      const auto v = security::check_response(resp.candidates[i], *agent.security, &guard);
      emit(EventKind::GuardrailVerdict, agent.id,
           with_fields(security::to_json(v), {{"task_id", task.task_id}, {"candidate", i}}));
      if (v.decision == security::Decision::Block) continue;
      answer = v.redacted_text.value_or(resp.candidates[i]);
      accepted = true;
    }
    if (!accepted) status = "blocked";
  } else if (!resp.candidates.empty()) {
    answer = resp.candidates.front();
  }

  if (agent.memory) {
    count_step();
    agent.memory->end_task_scope(task.task_id);
    emit(EventKind::MemoryWrite, agent.id, Json{{"op", "end_task_scope"}, {"task_id", task.task_id}});
    if (status == "completed") {
      count_step();
      memory::MemoryRecord rec;
      rec.key = task.task_id + ".answer";
      rec.content = answer;
      rec.format = memory::Format::Embedding;
      agent.memory->write(std::move(rec));
      emit(EventKind::MemoryWrite, agent.id,
           Json{{"op", "write"},
                {"key", task.task_id + ".answer"},
                {"scope", "long_term"},
                {"format", "embedding"}});
    }
  }
  return finish(status, answer, Json::object());
}

std::string Orchestrator::solve_subtask(ActiveCoreAgent& agent, const planning::TaskSpec& task,
                                        const planning::Subtask& subtask,
                                        std::size_t subtask_count, planning::AtomSet& world) {
  const auto inventory = tool_inventory();
  const auto& cfg = agent.planning;
  TracedModel planner(*this, agent.id, agent.model,
                      select_profile(agent, "plan", subtask.domain_tags), "plan");

  std::vector<planning::Plan> plans;
  if (cfg.rule_based) {
    planning::AtomSet goal;
    if (subtask_count == 1 && task.goal_atoms) {
      goal = *task.goal_atoms;
    } else {
      TracedModel formalizer(*this, agent.id, agent.model,
                             select_profile(agent, "formalize", subtask.domain_tags), "formalize");
      goal = planning::formalize_goal(subtask, formalizer);
    }
    const auto technique =
        planning::Technique::rule_based(planning::RuleDomain{world, goal, cfg.operators, cfg.max_depth});
    plans = planning::generate_plans(subtask, cfg.strategy, technique, planner, &inventory);
  } else {
    plans = planning::generate_plans(subtask, cfg.strategy, planning::Technique::lm_powered(), planner,
                                     &inventory);
  }
  for (const auto& plan : plans) {
    emit(EventKind::PlanCreated, agent.id,
         with_fields(planning::to_json(plan), {{"task_id", task.task_id}}));
  }

  const auto& chosen = planning::select_plan(plans);
  const auto selected_seq = emit(EventKind::PlanSelected, agent.id,
                                 Json{{"plan_id", chosen.plan_id},
                                      {"subtask_id", subtask.subtask_id},
                                      {"candidates", plans.size()}});

  std::vector<std::string> outputs;
  for (const auto& step : chosen.steps) {
    std::string output;
    for (std::size_t attempt = 0;; ++attempt) {
      planning::Feedback fb;
      fb.source = planning::FeedbackSource::Tool;
      bool failed = false;
      try {
        output = execute_step(agent, task, step, selected_seq);
        fb.content = output;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ToolFailure) throw;
        failed = true;
        fb.content = "error: " + e.detail();
      }
      const auto hint = planning::incorporate_feedback(fb, cfg.lexicon);
      if (hint == planning::RevisionHint::Proceed) break;
      if (hint == planning::RevisionHint::Abort || attempt >= cfg.max_retries) {
        if (failed) throw Error(ErrorCode::ToolFailure, step.target + ": " + fb.content);
        break;
      }
      emit(EventKind::Warning, agent.id,
           Json{{"code", "retry"},
                {"step", planning::to_json(step)},
                {"attempt", attempt + 1},
                {"feedback", fb.content}});
    }
    outputs.push_back(output);
  }

  if (cfg.rule_based) {
    if (auto next = planning::replay(world, cfg.operators, chosen.operator_sequence)) {
      world = std::move(*next);
    }
  }
  const std::string result = join(outputs, "; ");
  if (agent.memory) {
    count_step();
    memory::MemoryRecord rec;
    rec.key = subtask.subtask_id;
    rec.content = result;
    rec.scope = memory::Scope::short_term(task.task_id);
    agent.memory->write(std::move(rec));
    emit(EventKind::MemoryWrite, agent.id,
         Json{{"op", "write"},
              {"key", subtask.subtask_id},
              {"scope", "short_term"},
              {"task_id", task.task_id}});
  }
  return result;
}

std::string Orchestrator::execute_step(ActiveCoreAgent& agent, const planning::TaskSpec& task,
                                       const planning::Step& step, std::uint64_t origin_seq) {
  switch (step.op) {
    case planning::StepOp::ToolCall: {
      action::ActionRequest req;
      req.trigger = action::Trigger::PlanFollowing;
      req.target = step.target;
      req.args = bind_task_args(step.args, task);
      const auto owner = owner_of(step.target);
      if (owner && owner->passive && topology_.wiring == Wiring::ViaModel) {
        ModelRequest mreq;
        mreq.prompt = "EXECUTE: " + action::render_inline_call(step.target, req.args);
        const auto resp = call_model(agent.id, agent.model,
                                     select_profile(agent, "execute", {"worker:" + owner->id}),
                                     nullptr, mreq, "execute");
        const auto calls =
            action::parse_inline_calls(resp.candidates.empty() ? "" : resp.candidates.front());
        if (calls.empty()) {
          throw Error(ErrorCode::ToolFailure, "model issued no call for '" + step.target + "'");
        }
        std::vector<std::string> outputs;
        for (const auto& call : calls) {
          const auto seq = emit(EventKind::InlineCallParsed, agent.model,
                                Json{{"tool", call.tool_id},
                                     {"args", args_json(call.args)},
                                     {"source", "model_output"},
                                     {"origin_seq", origin_seq}});
          action::ActionRequest via;
          via.trigger = action::Trigger::ApiCallRequest;
          via.target = call.tool_id;
          via.args = call.args;
          outputs.push_back(dispatch_with_chain(via, seq, agent.model, &agent, task.task_id));
        }
        return join(outputs, "\n");
      }
      return dispatch_with_chain(req, origin_seq, agent.id, &agent, task.task_id);
    }
    case planning::StepOp::MemoryOp:
      return execute_memory_step(agent, task, step);
    case planning::StepOp::ModelCall: {
      ModelRequest mreq;
      const auto* prompt = find_arg(step.args, "prompt");
      mreq.prompt = prompt ? *prompt : step.target;
      const auto resp = call_model(agent.id, agent.model, select_profile(agent, "model_call", {}),
                                   nullptr, mreq, "model_call");
      return resp.candidates.empty() ? "" : resp.candidates.front();
    }
    case planning::StepOp::Emit: {
      const auto* op = find_arg(step.args, "operator");
      return op ? *op : step.target;
    }
  }
  return "";
}

std::string Orchestrator::execute_memory_step(ActiveCoreAgent& agent, const planning::TaskSpec& task,
                                              const planning::Step& step) {
  ActiveCoreAgent* holder = nullptr;
  if (const auto* named = find_arg(step.args, "agent")) {
    holder = find_active(*named);
  } else if (agent.memory) {
    holder = &agent;
  } else {
    for (auto& a : topology_.actives) {
      if (a.memory) {
        holder = &a;
        break;
      }
    }
  }
  if (holder == nullptr || !holder->memory) {
    throw Error(ErrorCode::ToolFailure, "no memory module available for " + step.target);
  }
  count_step();
  auto& store = *holder->memory;
  auto require = [&](const char* name) -> const std::string& {
    const auto* v = find_arg(step.args, name);
    if (v == nullptr) throw Error(ErrorCode::ToolFailure, step.target + " needs '" + name + "'");
    return *v;
  };
  auto columns = [&]() {
    Json row = Json::object();
    for (const auto& [k, v] : step.args) {
      if (k != "table" && k != "key" && k != "agent") row[k] = v;
    }
    return row;
  };

  EventKind kind = EventKind::MemoryWrite;
  Json payload{{"op", step.target}, {"requested_by", agent.id}};
  std::string output;

  if (step.target == "memory_write") {
    memory::MemoryRecord rec;
    rec.key = require("key");
    const auto* content = find_arg(step.args, "content");
    rec.content = content ? *content : "";
    const auto* scope = find_arg(step.args, "scope");
    rec.scope = scope && *scope == "short_term" ? memory::Scope::short_term(task.task_id)
                                                : memory::Scope::long_term();
    const auto* format = find_arg(step.args, "format");
    rec.format = format ? memory::format_from_string(*format) : memory::Format::NaturalLanguage;
    payload["key"] = rec.key;
    payload["scope"] = rec.scope.is_long_term() ? "long_term" : "short_term";
    payload["format"] = memory::to_string(rec.format);
    output = "stored " + rec.key;
    store.write(std::move(rec));
  } else if (step.target == "memory_read") {
    kind = EventKind::MemoryRead;
    std::vector<memory::MemoryRecord> hits;
    if (const auto* text = find_arg(step.args, "text")) {
      hits = store.read(memory::BySimilarity{*text, 1});
      payload["text"] = *text;
    } else {
      const auto& key = require("key");
      hits = store.read(memory::ByKey{key});
      payload["key"] = key;
    }
    Json keys = Json::array();
    for (const auto& r : hits) keys.push_back(r.key);
    payload["hits"] = keys;
    output = hits.empty() ? "" : memory::content_text(hits.front().content);
  } else if (step.target == "table_insert") {
    const auto& table = require("table");
    const auto* key = find_arg(step.args, "key");
    const std::string row_key = key ? *key : table + "#" + std::to_string(store.clock());
    store.insert_row(table, row_key, columns());
    payload["table"] = table;
    payload["key"] = row_key;
    output = "inserted " + row_key;
  } else if (step.target == "table_select") {
    kind = EventKind::MemoryRead;
    const auto& table = require("table");
    const auto where = columns();
    const auto rows = store.select_rows(table, where);
    Json contents = Json::array();
    Json keys = Json::array();
    for (const auto& r : rows) {
      contents.push_back(r.content);
      keys.push_back(r.key);
    }
    payload["table"] = table;
    payload["where"] = where;
    payload["hits"] = keys;
    output = contents.dump();
  } else {
    throw Error(ErrorCode::ToolFailure, "unknown memory operation '" + step.target + "'");
  }

  if (holder != &agent) {
    const auto env = ledger_.make(holder->id, agent.id, EnvelopeKind::Feedback,
                                  Json{{"op", step.target}, {"result", output}});
    const auto hint = planning::incorporate_feedback(
        planning::Feedback{planning::FeedbackSource::Sibling, output, std::nullopt},
        agent.planning.lexicon);
    payload["feedback"] = Json{{"msg_id", env.msg_id}, {"hint", planning::to_string(hint)}};
  }
  emit(kind, holder->id, std::move(payload));
  return output;
}

}  // namespace umf::orchestration
