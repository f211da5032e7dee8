#pragma once

// Three registrants and a routing script whose expected winners were enumerated by hand:
//
//   id       domains           capacity  registered_at
//   alpha    finance           2         5
//   beta     finance, travel   2         9
//   gamma    weather           1         12
//
//   #  task domains  loads before (a/b/g)  domain matches       winner
//   1  finance       0/0/0                 alpha, beta          alpha  (tie on load, earlier)
//   2  finance       1/0/0                 alpha, beta          beta   (lower load)
//   3  travel        1/1/0                 beta                 beta
//   4  travel        1/2/0                 none with capacity   gamma  (fallback, lower load)
//   5  sports        1/2/1                 none                 alpha  (only one with capacity)
//   6  finance       2/2/1                 none eligible        NoAvailableCoreAgent
//
// Then alpha and beta each finish a task, the clock moves to 16 without heartbeats from
// alpha (last seen at 5, TTL 10) so alpha goes offline and beta takes the next finance
// task; a heartbeat revives alpha, which then wins on load.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "umf/gateway.hpp"

namespace umf::fixture {

struct RouteCase {
  std::set<std::string> domains;
  std::optional<std::string> winner;  // nullopt: NoAvailableCoreAgent
};

inline orchestration::Gateway three_registrants() {
  using orchestration::GatewayRegistration;
  orchestration::Gateway gw(10);
  gw.set_now(5);
  gw.register_agent(GatewayRegistration{"alpha", {"finance"}, 2});
  gw.set_now(9);
  gw.register_agent(GatewayRegistration{"beta", {"finance", "travel"}, 2});
  gw.set_now(12);
  gw.register_agent(GatewayRegistration{"gamma", {"weather"}, 1});
  return gw;
}

inline const std::vector<RouteCase>& route_script() {
  static const std::vector<RouteCase> cases{
      {{"finance"}, "alpha"}, {{"finance"}, "beta"},  {{"travel"}, "beta"},
      {{"travel"}, "gamma"},  {{"sports"}, "alpha"},  {{"finance"}, std::nullopt},
  };
  return cases;
}

/// Runs the whole fixture; returns a description of the first mismatch, or "" on success.
inline std::string run_gateway_fixture() {
  using orchestration::AgentStatus;
  auto gw = three_registrants();
  if (gw.registration("alpha").registered_at != 5 || gw.registration("gamma").registered_at != 12) {
    return "registration ticks not recorded";
  }
  int step = 0;
  for (const auto& c : route_script()) {
    ++step;
    std::optional<std::string> got;
    try {
      got = gw.route(c.domains);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoAvailableCoreAgent) return "route " + std::to_string(step) + ": " + e.what();
    }
    if (got != c.winner) {
      return "route " + std::to_string(step) + ": got " + got.value_or("none") + ", want " +
             c.winner.value_or("none");
    }
  }
  gw.release("alpha");
  gw.release("beta");
  gw.set_now(16);
  if (gw.registration("alpha").status != AgentStatus::Offline) return "alpha should be offline at 16";
  if (gw.registration("beta").status != AgentStatus::Available) return "beta should still be available";
  if (auto w = gw.route({"finance"}); w != "beta") return "after expiry: got " + w + ", want beta";
  gw.heartbeat("alpha", 1, AgentStatus::Available);
  if (auto w = gw.route({"finance"}); w != "alpha") return "after heartbeat: got " + w + ", want alpha";
  return "";
}

}  // namespace umf::fixture
