#include "umf/gateway.hpp"

#include <algorithm>
#include <tuple>

namespace umf::orchestration {

std::string_view to_string(AgentStatus s) {
  switch (s) {
    case AgentStatus::Available: return "available";
    case AgentStatus::Busy: return "busy";
    case AgentStatus::Offline: return "offline";
  }
  return "offline";
}

AgentStatus agent_status_from_string(std::string_view s) {
  if (s == "available") return AgentStatus::Available;
  if (s == "busy") return AgentStatus::Busy;
  if (s == "offline") return AgentStatus::Offline;
  throw Error(ErrorCode::ParseError, "unknown agent status '" + std::string(s) + "'");
}

Json to_json(const GatewayRegistration& reg) {
  return Json{{"core_agent_id", reg.core_agent_id},
              {"domains", reg.domains},
              {"capacity", reg.capacity},
              {"load", reg.load},
              {"status", to_string(reg.status)},
              {"registered_at", reg.registered_at},
              {"last_heartbeat", reg.last_heartbeat}};
}

void Gateway::register_agent(GatewayRegistration reg) {
  const bool duplicate = std::any_of(regs_.begin(), regs_.end(), [&](const auto& r) {
    return r.core_agent_id == reg.core_agent_id;
  });
  if (duplicate) {
    throw Error(ErrorCode::DuplicateRegistration, "'" + reg.core_agent_id + "' already registered");
  }
  if (reg.capacity == 0 || reg.load > reg.capacity) {
    throw Error(ErrorCode::TopologyInvalid, "registration needs 0 <= load <= capacity, capacity > 0");
  }
  reg.registered_at = now_;
  reg.last_heartbeat = now_;
  regs_.push_back(std::move(reg));
}

GatewayRegistration& Gateway::find(std::string_view core_agent_id) {
  for (auto& r : regs_) {
    if (r.core_agent_id == core_agent_id) return r;
  }
  throw Error(ErrorCode::NoAvailableCoreAgent,
              "'" + std::string(core_agent_id) + "' is not registered");
}

const GatewayRegistration& Gateway::registration(std::string_view core_agent_id) const {
  return const_cast<Gateway*>(this)->find(core_agent_id);
}

void Gateway::heartbeat(std::string_view core_agent_id, std::size_t load, AgentStatus status) {
  auto& r = find(core_agent_id);
  r.load = std::min(load, r.capacity);
  r.status = status;
  r.last_heartbeat = now_;
}

void Gateway::set_now(std::uint64_t tick) {
  now_ = std::max(now_, tick);
  expire();
}

void Gateway::expire() {
  for (auto& r : regs_) {
    if (now_ - r.last_heartbeat > ttl_) r.status = AgentStatus::Offline;
  }
}

std::string Gateway::route(const std::set<std::string>& task_domains) {
  expire();
  std::vector<GatewayRegistration*> eligible;
  for (auto& r : regs_) {
    if (r.status == AgentStatus::Available && r.load < r.capacity) eligible.push_back(&r);
  }
  if (eligible.empty()) throw Error(ErrorCode::NoAvailableCoreAgent, "no available core-agent");

  std::vector<GatewayRegistration*> matching;
  for (auto* r : eligible) {
    const bool overlap = std::any_of(task_domains.begin(), task_domains.end(),
                                     [&](const std::string& d) { return r->domains.count(d) != 0; });
    if (overlap) matching.push_back(r);
  }
  const auto& pool = matching.empty() ? eligible : matching;
  auto* winner = *std::min_element(pool.begin(), pool.end(), [](const auto* a, const auto* b) {
    return std::tie(a->load, a->registered_at) < std::tie(b->load, b->registered_at);
  });
  ++winner->load;
  return winner->core_agent_id;
}

void Gateway::release(std::string_view core_agent_id) {
  auto& r = find(core_agent_id);
  if (r.load > 0) --r.load;
}

}  // namespace umf::orchestration
