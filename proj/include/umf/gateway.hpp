#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "umf/core.hpp"

namespace umf::orchestration {

enum class AgentStatus { Available, Busy, Offline };

std::string_view to_string(AgentStatus s);
AgentStatus agent_status_from_string(std::string_view s);

struct GatewayRegistration {
  std::string core_agent_id;
  std::set<std::string> domains;
  std::size_t capacity = 1;
  std::size_t load = 0;
  AgentStatus status = AgentStatus::Available;
  std::uint64_t registered_at = 0;
  std::uint64_t last_heartbeat = 0;
};

Json to_json(const GatewayRegistration& reg);

inline constexpr std::uint64_t kDefaultGatewayTtl = 10;

/// Registration and routing point for active core-agents.
///
/// Routing considers only available registrants with spare capacity. Among those it
/// prefers any whose domains intersect the task's, falling back to all of them, then
/// picks the lowest load, then the earliest registration.
class Gateway {
 public:
  explicit Gateway(std::uint64_t ttl = kDefaultGatewayTtl) : ttl_(ttl) {}

  void register_agent(GatewayRegistration reg);
  void heartbeat(std::string_view core_agent_id, std::size_t load, AgentStatus status);
  /// Moves the gateway clock forward (never backwards) and expires silent registrants.
  void set_now(std::uint64_t tick);
  void advance(std::uint64_t ticks = 1) { set_now(now_ + ticks); }

  std::string route(const std::set<std::string>& task_domains);
  /// Decrements the load of a registrant that finished a routed task.
  void release(std::string_view core_agent_id);

  std::uint64_t now() const { return now_; }
  std::uint64_t ttl() const { return ttl_; }
  const GatewayRegistration& registration(std::string_view core_agent_id) const;
  const std::vector<GatewayRegistration>& registrations() const { return regs_; }

 private:
  GatewayRegistration& find(std::string_view core_agent_id);
  void expire();

  std::uint64_t ttl_;
  std::uint64_t now_ = 0;
  std::vector<GatewayRegistration> regs_;
};

}  // namespace umf::orchestration
