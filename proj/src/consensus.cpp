#include "umf/consensus.hpp"

#include <algorithm>
#include <map>

namespace umf::consensus {

std::uint64_t Rng::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t Rng::between(std::uint64_t lo, std::uint64_t hi) {
  return lo + next() % (hi - lo + 1);
}

double Rng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Follower: return "follower";
    case Role::Candidate: return "candidate";
    case Role::Leader: return "leader";
  }
  return "follower";
}

std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::RequestVote: return "request_vote";
    case MessageKind::VoteGranted: return "vote_granted";
    case MessageKind::Heartbeat: return "heartbeat";
  }
  return "heartbeat";
}

Json to_json(const ElectionEvent& e) {
  Json j{{"tick", e.tick}, {"event", e.kind}, {"node", e.node}, {"term", e.term}};
  if (!e.peer.empty()) j["peer"] = e.peer;
  return j;
}

std::size_t majority(std::size_t cluster_size) { return cluster_size / 2 + 1; }

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  Rng r(seed * 0x100000001B3ull + salt);
  return r.next();
}

void log(std::vector<ElectionEvent>* events, std::uint64_t tick, const char* kind,
         const std::string& node, std::uint64_t term, const std::string& peer = {}) {
  if (events) events->push_back(ElectionEvent{tick, kind, node, term, peer});
}

void reset_timeout(NodeState& node, std::uint64_t now) {
  node.timeout_at = now + node.rng.between(kTimeoutMin, kTimeoutMax);
}

void become_leader(NodeState& node, std::uint64_t now, std::vector<ElectionEvent>* events) {
  node.role = Role::Leader;
  node.next_heartbeat_at = now;
  log(events, now, "leader", node.node_id, node.term);
}

void send(Cluster& c, ElectionMessage msg, std::vector<ElectionEvent>& events) {
  auto& net = c.net;
  if (net.rng.unit() < net.config.drop_prob) {
    log(&events, c.now, "drop", msg.from, msg.term, msg.to);
    return;
  }
  const std::uint64_t delay = net.rng.between(net.config.delay_min, net.config.delay_max);
  net.in_flight.push_back(InFlight{c.now + delay, net.sent++, std::move(msg)});
}

NodeState* find_node(Cluster& c, const std::string& id) {
  for (auto& n : c.nodes) {
    if (n.node_id == id) return &n;
  }
  return nullptr;
}

}  // namespace

Cluster make_cluster(std::size_t n, const NetConfig& config, std::uint64_t seed) {
  Cluster c;
  c.net.config = config;
  if (c.net.config.delay_min == 0) c.net.config.delay_min = 1;
  c.net.config.delay_max = std::max(c.net.config.delay_max, c.net.config.delay_min);
  c.net.rng = Rng(mix(seed, 0));
  for (std::size_t i = 0; i < n; ++i) {
    NodeState node;
    node.node_id = "n" + std::to_string(i);
    node.rng = Rng(mix(seed, i + 1));
    reset_timeout(node, 0);
    c.nodes.push_back(std::move(node));
  }
  return c;
}

std::vector<ElectionMessage> handle_message(NodeState& node, const ElectionMessage& msg,
                                            const MessageContext& ctx,
                                            std::vector<ElectionEvent>* events) {
  std::vector<ElectionMessage> out;
  if (msg.term > node.term) {
    if (node.role != Role::Follower) log(events, ctx.now, "step_down", node.node_id, msg.term);
    node.term = msg.term;
    node.role = Role::Follower;
    node.voted_for.reset();
    node.votes.clear();
  }

  switch (msg.kind) {
    case MessageKind::RequestVote: {
      const bool can_vote = !node.voted_for || *node.voted_for == msg.from;
      if (msg.term >= node.term && can_vote) {
        node.voted_for = msg.from;
        reset_timeout(node, ctx.now);
        log(events, ctx.now, "vote_granted", node.node_id, node.term, msg.from);
        out.push_back({MessageKind::VoteGranted, node.term, node.node_id, msg.from});
      }
      break;
    }
    case MessageKind::VoteGranted: {
      if (node.role == Role::Candidate && msg.term == node.term) {
        node.votes.insert(msg.from);
        if (node.votes.size() >= majority(ctx.cluster_size)) become_leader(node, ctx.now, events);
      }
      break;
    }
    case MessageKind::Heartbeat: {
      if (msg.term >= node.term && node.role != Role::Leader) {
        if (node.role == Role::Candidate) {
          log(events, ctx.now, "step_down", node.node_id, node.term);
          node.role = Role::Follower;
          node.votes.clear();
        }
        reset_timeout(node, ctx.now);
      }
      break;
    }
  }
  return out;
}

void step_tick(Cluster& c, std::vector<ElectionEvent>& events) {
  ++c.now;
  const MessageContext ctx{c.nodes.size(), c.now};

  std::vector<InFlight> due;
  auto split = std::stable_partition(c.net.in_flight.begin(), c.net.in_flight.end(),
                                     [&](const InFlight& m) { return m.deliver_at != c.now; });
  due.assign(std::make_move_iterator(split), std::make_move_iterator(c.net.in_flight.end()));
  c.net.in_flight.erase(split, c.net.in_flight.end());
  std::sort(due.begin(), due.end(),
            [](const InFlight& a, const InFlight& b) { return a.seq < b.seq; });

  for (auto& m : due) {
    NodeState* node = find_node(c, m.msg.to);
    if (!node) continue;
    for (auto& reply : handle_message(*node, m.msg, ctx, &events)) send(c, std::move(reply), events);
  }

  for (auto& node : c.nodes) {
    if (node.role == Role::Leader || c.now < node.timeout_at) continue;
    node.role = Role::Candidate;
    ++node.term;
    node.voted_for = node.node_id;
    node.votes = {node.node_id};
    reset_timeout(node, c.now);
    log(&events, c.now, "timeout", node.node_id, node.term);
    if (node.votes.size() >= majority(c.nodes.size())) {
      become_leader(node, c.now, &events);
      continue;
    }
    node.next_heartbeat_at = c.now + kHeartbeatInterval;
    for (const auto& peer : c.nodes) {
      if (peer.node_id == node.node_id) continue;
      send(c, {MessageKind::RequestVote, node.term, node.node_id, peer.node_id}, events);
    }
  }

  // Leaders heartbeat every interval; candidates re-request votes from silent peers on
  // the same cadence (Raft retries unanswered RPCs).
  for (auto& node : c.nodes) {
    if (node.role == Role::Follower || c.now < node.next_heartbeat_at) continue;
    node.next_heartbeat_at = c.now + kHeartbeatInterval;
    const bool leader = node.role == Role::Leader;
    for (const auto& peer : c.nodes) {
      if (peer.node_id == node.node_id) continue;
      if (leader) {
        send(c, {MessageKind::Heartbeat, node.term, node.node_id, peer.node_id}, events);
      } else if (!node.votes.count(peer.node_id)) {
        send(c, {MessageKind::RequestVote, node.term, node.node_id, peer.node_id}, events);
      }
    }
  }
}

namespace {

std::optional<Leader> current_leader(const Cluster& c) {
  std::optional<Leader> best;
  for (const auto& n : c.nodes) {
    if (n.role == Role::Leader && (!best || n.term > best->term)) best = Leader{n.node_id, n.term};
  }
  return best;
}

}  // namespace

ElectionRun run_election(std::size_t n_nodes, const NetConfig& config, std::uint64_t seed,
                         std::uint64_t max_ticks) {
  if (n_nodes == 0 || max_ticks == 0) {
    throw Error(ErrorCode::TopologyInvalid, "election needs at least one node and one tick");
  }
  Cluster c = make_cluster(n_nodes, config, seed);
  ElectionRun run;
  while (c.now < max_ticks) {
    step_tick(c, run.events);
    if (auto leader = current_leader(c)) {
      run.leader = leader;
      break;
    }
  }
  run.ticks_elapsed = c.now;
  return run;
}

ElectionRun simulate(std::size_t n_nodes, const NetConfig& config, std::uint64_t seed,
                     std::uint64_t ticks) {
  Cluster c = make_cluster(n_nodes, config, seed);
  ElectionRun run;
  while (c.now < ticks) {
    step_tick(c, run.events);
    if (!run.leader) run.leader = current_leader(c);
  }
  run.ticks_elapsed = c.now;
  return run;
}

Leader elect_leader(std::size_t n_nodes, const NetConfig& config, std::uint64_t seed,
                    std::uint64_t max_ticks) {
  auto run = run_election(n_nodes, config, seed, max_ticks);
  if (!run.leader) {
    throw Error(ErrorCode::ElectionTimeout,
                "no leader within " + std::to_string(max_ticks) + " ticks");
  }
  return *run.leader;
}

bool election_safe(const std::vector<ElectionEvent>& events) {
  std::map<std::uint64_t, std::string> leader_of_term;
  for (const auto& e : events) {
    if (e.kind != "leader") continue;
    auto [it, inserted] = leader_of_term.emplace(e.term, e.node);
    if (!inserted && it->second != e.node) return false;
  }
  return true;
}

}  // namespace umf::consensus
