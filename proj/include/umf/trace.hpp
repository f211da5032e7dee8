#pragma once

#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "umf/core.hpp"

namespace umf {

enum class EventKind {
  TaskReceived,
  Decomposition,
  PlanCreated,
  PlanSelected,
  ProfileSet,
  ModelCall,
  InlineCallParsed,
  ToolCalled,
  ToolPayloadDelivered,
  GuardrailVerdict,
  MemoryWrite,
  MemoryRead,
  RouteSelected,
  LeaderElected,
  Attach,
  Detach,
  HumanMsg,
  Warning,
  TaskDone,
};

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view s);

struct TraceEvent {
  std::uint64_t seq = 0;
  std::uint64_t tick = 0;
  EventKind kind = EventKind::Warning;
  std::string actor;
  Json payload;
};

/// Field order is fixed: seq, tick, kind, actor, payload.
Json to_json(const TraceEvent& event);
TraceEvent trace_event_from_json(const Json& j);

/// Append-only event log. Appends are serialized, so seq is gapless from 0 even when
/// several workers append concurrently.
class Trace {
 public:
  Trace() = default;
  Trace(const Trace& other);
  Trace& operator=(const Trace& other);

  std::uint64_t append(std::uint64_t tick, EventKind kind, std::string actor, Json payload);
  std::vector<TraceEvent> events() const;
  std::size_t size() const;

  void write_jsonl(std::ostream& out) const;
  std::string to_jsonl() const;
  static Trace from_jsonl(std::istream& in);

 private:
  mutable std::mutex mutex_;
  std::vector<TraceEvent> events_;
};

}  // namespace umf
