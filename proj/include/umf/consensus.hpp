#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "umf/core.hpp"

namespace umf::consensus {

/// splitmix64. Used instead of <random> distributions so traces are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}
  std::uint64_t next();
  /// Uniform integer in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi);
  /// Uniform double in [0, 1).
  double unit();

 private:
  std::uint64_t state_;
};

inline constexpr std::uint64_t kTimeoutMin = 10;
inline constexpr std::uint64_t kTimeoutMax = 20;
inline constexpr std::uint64_t kHeartbeatInterval = 3;

enum class Role { Follower, Candidate, Leader };
enum class MessageKind { RequestVote, VoteGranted, Heartbeat };

std::string_view to_string(Role r);
std::string_view to_string(MessageKind k);

struct ElectionMessage {
  MessageKind kind = MessageKind::Heartbeat;
  std::uint64_t term = 0;
  std::string from;
  std::string to;
};

struct NodeState {
  std::string node_id;
  Role role = Role::Follower;
  std::uint64_t term = 0;
  std::optional<std::string> voted_for;
  std::uint64_t timeout_at = 0;
  Rng rng;
  std::set<std::string> votes;  // votes received in the current term while candidate
  std::uint64_t next_heartbeat_at = 0;
};

struct NetConfig {
  double drop_prob = 0.0;
  std::uint64_t delay_min = 1;
  std::uint64_t delay_max = 2;
};

struct InFlight {
  std::uint64_t deliver_at = 0;
  std::uint64_t seq = 0;
  ElectionMessage msg;
};

struct SimNet {
  NetConfig config;
  Rng rng;
  std::vector<InFlight> in_flight;
  std::uint64_t sent = 0;
};

struct ElectionEvent {
  std::uint64_t tick = 0;
  std::string kind;  // timeout, vote_granted, leader, step_down, send, drop, deliver
  std::string node;
  std::uint64_t term = 0;
  std::string peer;
};

Json to_json(const ElectionEvent& e);

struct Cluster {
  std::vector<NodeState> nodes;
  SimNet net;
  std::uint64_t now = 0;
};

/// Builds n followers at term 0 with per-node RNGs derived from seed.
Cluster make_cluster(std::size_t n, const NetConfig& config, std::uint64_t seed);

struct MessageContext {
  std::size_t cluster_size = 1;
  std::uint64_t now = 0;
};

std::size_t majority(std::size_t cluster_size);

/// Applies one election message to node; returns messages to send and appends events.
std::vector<ElectionMessage> handle_message(NodeState& node, const ElectionMessage& msg,
                                            const MessageContext& ctx,
                                            std::vector<ElectionEvent>* events = nullptr);

/// Advances one tick: deliver due messages, fire expired timeouts, send heartbeats.
void step_tick(Cluster& cluster, std::vector<ElectionEvent>& events);

struct Leader {
  std::string node_id;
  std::uint64_t term = 0;
};

struct ElectionRun {
  std::optional<Leader> leader;
  std::uint64_t ticks_elapsed = 0;
  std::vector<ElectionEvent> events;
};

/// Steps until some node is leader or max_ticks elapse. A run without a leader is a
/// valid outcome (heavy loss); elect_leader turns it into ElectionTimeout.
ElectionRun run_election(std::size_t n_nodes, const NetConfig& config, std::uint64_t seed,
                         std::uint64_t max_ticks);

/// Runs exactly `ticks` ticks regardless of outcome; used for safety checking.
ElectionRun simulate(std::size_t n_nodes, const NetConfig& config, std::uint64_t seed,
                     std::uint64_t ticks);

Leader elect_leader(std::size_t n_nodes, const NetConfig& config, std::uint64_t seed,
                    std::uint64_t max_ticks);

/// True if no term in the event log has two distinct leaders.
bool election_safe(const std::vector<ElectionEvent>& events);

}  // namespace umf::consensus
