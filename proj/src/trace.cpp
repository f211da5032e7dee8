#include "umf/trace.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <sstream>

namespace umf {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 19> kKindNames{{
    {EventKind::TaskReceived, "task_received"},
    {EventKind::Decomposition, "decomposition"},
    {EventKind::PlanCreated, "plan_created"},
    {EventKind::PlanSelected, "plan_selected"},
    {EventKind::ProfileSet, "profile_set"},
    {EventKind::ModelCall, "model_call"},
    {EventKind::InlineCallParsed, "inline_call_parsed"},
    {EventKind::ToolCalled, "tool_called"},
    {EventKind::ToolPayloadDelivered, "tool_payload_delivered"},
    {EventKind::GuardrailVerdict, "guardrail_verdict"},
    {EventKind::MemoryWrite, "memory_write"},
    {EventKind::MemoryRead, "memory_read"},
    {EventKind::RouteSelected, "route_selected"},
    {EventKind::LeaderElected, "leader_elected"},
    {EventKind::Attach, "attach"},
    {EventKind::Detach, "detach"},
    {EventKind::HumanMsg, "human_msg"},
    {EventKind::Warning, "warning"},
    {EventKind::TaskDone, "task_done"},
}};

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "warning";
}

EventKind event_kind_from_string(std::string_view s) {
  for (const auto& [k, name] : kKindNames) {
    if (name == s) return k;
  }
  throw Error(ErrorCode::ParseError, "unknown event kind '" + std::string(s) + "'");
}

Json to_json(const TraceEvent& event) {
  Json j;
  j["seq"] = event.seq;
  j["tick"] = event.tick;
  j["kind"] = to_string(event.kind);
  j["actor"] = event.actor;
  j["payload"] = event.payload;
  return j;
}

TraceEvent trace_event_from_json(const Json& j) {
  TraceEvent e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.tick = j.at("tick").get<std::uint64_t>();
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  e.actor = j.at("actor").get<std::string>();
  e.payload = j.value("payload", Json::object());
  return e;
}

Trace::Trace(const Trace& other) {
  std::lock_guard lock(other.mutex_);
  events_ = other.events_;
}

Trace& Trace::operator=(const Trace& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  events_ = other.events_;
  return *this;
}

std::uint64_t Trace::append(std::uint64_t tick, EventKind kind, std::string actor, Json payload) {
  std::lock_guard lock(mutex_);
  const std::uint64_t seq = events_.size();
  events_.push_back(TraceEvent{seq, tick, kind, std::move(actor), std::move(payload)});
  return seq;
}

std::vector<TraceEvent> Trace::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::size_t Trace::size() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

void Trace::write_jsonl(std::ostream& out) const {
  std::lock_guard lock(mutex_);
  for (const auto& e : events_) out << to_json(e).dump() << '\n';
}

std::string Trace::to_jsonl() const {
  std::ostringstream out;
  write_jsonl(out);
  return out.str();
}

Trace Trace::from_jsonl(std::istream& in) {
  Trace t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ParseError, "bad trace line: " + line);
    t.events_.push_back(trace_event_from_json(j));
  }
  return t;
}

}  // namespace umf
