#include <doctest.h>

#include <fstream>
#include <set>

#include "bundled.hpp"
#include "umf/scenario.hpp"

using namespace umf;
using namespace umf::scenario;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::ParseError;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  return Json::parse(in);
}

std::set<std::string> passive_ids(const ScenarioSpec& spec) {
  std::set<std::string> out;
  for (const auto& p : spec.topology.passives) out.insert(p.id);
  return out;
}

TraceEvent event(std::uint64_t seq, EventKind kind, std::string actor, Json payload) {
  return TraceEvent{seq, 0, kind, std::move(actor), std::move(payload)};
}

AssertionSpec parse_one(const Json& a) {
  Json doc = load_json(fixture::bundled_scenarios()[0]);
  doc["assertions"] = Json::array({a});
  return parse_scenario(doc).assertions.at(0);
}

}  // namespace

TEST_CASE("bundled scenarios pass and are reproducible") {
  for (const auto& path : fixture::bundled_scenarios()) {
    CAPTURE(path);
    const auto spec = load_scenario(path);
    const auto a = run_scenario(spec);
    const auto b = run_scenario(spec);
    CHECK(a.passed(spec));
    CHECK_FALSE(a.error);
    for (const auto& r : a.results) {
      CAPTURE(r.description);
      CHECK(r.passed);
    }
    CHECK(a.trace.to_jsonl() == b.trace.to_jsonl());
    CHECK(check_invariants(a.trace.events(), passive_ids(spec)).empty());
  }
}

TEST_CASE("spec examples on the bundled traces") {
  const auto dir = std::string(UMF_SOURCE_DIR) + "/scenarios/";
  SUBCASE("LA1 warns about the missing egress safeguard") {
    const auto run = run_scenario(load_scenario(dir + "la1.json"));
    const auto results = check_assertions(
        run.trace.events(),
        {parse_one(Json{{"kind", "require_event"}, {"event", "warning"},
                        {"where", {"payload.message=no egress safeguard configured"}}}),
         parse_one(Json{{"kind", "event_count"}, {"event", "decomposition"}, {"max", 0}})});
    CHECK(results[0].passed);
    CHECK(results[1].passed);
  }
  SUBCASE("LA2-B has no election") {
    const auto run = run_scenario(load_scenario(dir + "la2b.json"));
    for (const auto& e : run.trace.events()) CHECK(e.kind != EventKind::LeaderElected);
  }
  SUBCASE("LA3 rejects a candidate, then accepts one") {
    const auto run = run_scenario(load_scenario(dir + "la3.json"));
    std::optional<std::uint64_t> blocked;
    bool allowed_after = false;
    for (const auto& e : run.trace.events()) {
      if (e.kind != EventKind::GuardrailVerdict || e.payload["axis"] != "response") continue;
      if (e.payload["decision"] == "block" && !blocked) blocked = e.seq;
      if (e.payload["decision"] == "allow" && blocked) allowed_after = true;
    }
    CHECK(blocked);
    CHECK(allowed_after);
  }
  SUBCASE("LA4 keeps the seeded secret out of external payloads") {
    const auto run = run_scenario(load_scenario(dir + "la4.json"));
    const auto events = run.trace.events();
    const auto results = check_assertions(
        events, {parse_one(Json{{"kind", "forbid_substring_in_external_payload"}, {"text", "S3CR3T"}}),
                 parse_one(Json{{"kind", "event_count"}, {"event", "decomposition"}, {"min", 2}})});
    CHECK(results[0].passed);
    CHECK(results[1].passed);
    bool secret_seen_internally = false;
    for (const auto& e : events) {
      if (e.kind == EventKind::HumanMsg && e.payload.dump().find("S3CR3T") != std::string::npos) {
        secret_seen_internally = true;
      }
    }
    CHECK(secret_seen_internally);
  }
}

TEST_CASE("assertion evaluation") {
  const std::vector<TraceEvent> events{
      event(0, EventKind::TaskReceived, "a", Json{{"task_id", "t"}}),
      event(1, EventKind::ToolPayloadDelivered, "w",
            Json{{"tool", "int"}, {"external", false}, {"payload", "SECRET"}, {"correlation", "m0"}}),
      event(2, EventKind::PlanCreated, "a", Json{{"cost", 2.0}, {"nested", {{"x", 1}}}}),
      event(3, EventKind::LeaderElected, "a", Json::object()),
      event(4, EventKind::TaskDone, "a", Json{{"task_id", "t"}, {"status", "completed"}}),
  };
  auto one = [&](const Json& a) { return check_assertions(events, {parse_one(a)}).at(0).passed; };

  CHECK(one(Json{{"kind", "forbid_substring_in_external_payload"}, {"text", "SECRET"}}));
  CHECK_FALSE(one(Json{{"kind", "event_order"}, {"before", "leader_elected"}, {"after", "plan_created"}}));
  CHECK(one(Json{{"kind", "event_order"}, {"before", "plan_created"}, {"after", "leader_elected"}}));
  CHECK_FALSE(one(Json{{"kind", "event_order"}, {"before", "attach"}, {"after", "task_done"}}));
  CHECK(one(Json{{"kind", "event_count"}, {"event", "plan_created"}, {"min", 1}, {"max", 1}}));
  CHECK_FALSE(one(Json{{"kind", "event_count"}, {"event", "plan_created"}, {"min", 2}}));
  CHECK(one(Json{{"kind", "require_event"}, {"event", "plan_created"}, {"where", {{"payload.cost", 2.0}}}}));
  CHECK(one(Json{{"kind", "require_event"}, {"event", "plan_created"}, {"where", {"payload.cost=2.0"}}}));
  CHECK(one(Json{{"kind", "require_event"}, {"event", "plan_created"}, {"where", {"payload.nested.x=1"}}}));
  CHECK_FALSE(one(Json{{"kind", "require_event"}, {"event", "plan_created"}, {"where", {"payload.nope=1"}}}));
  CHECK(one(Json{{"kind", "forbid_event"}, {"event", "task_done"}, {"where", {"payload.status=failed"}}}));
  CHECK(one(Json{{"kind", "require_event"}, {"event", "task_done"}, {"where", {"seq=4", "actor=a"}}}));

  SUBCASE("evaluation leaves the trace alone") {
    Trace trace;
    for (const auto& e : events) trace.append(e.tick, e.kind, e.actor, e.payload);
    const auto before = trace.to_jsonl();
    check_assertions(trace.events(), {parse_one(Json{{"kind", "event_count"}, {"event", "task_done"}})});
    CHECK(trace.to_jsonl() == before);
  }
  SUBCASE("predicates may only name trace event fields") {
    Json doc = load_json(fixture::bundled_scenarios()[0]);
    doc["assertions"] = Json::array({Json{{"kind", "require_event"}, {"event", "task_done"}, {"where", {"bogus=1"}}}});
    CHECK(code_of([&] { parse_scenario(doc); }) == ErrorCode::ScenarioInvalid);
  }
}

TEST_CASE("structural invariant checker") {
  std::vector<TraceEvent> events{
      event(0, EventKind::HumanMsg, "human", Json{{"recipient", "worker"}}),
      event(1, EventKind::TaskReceived, "a", Json{{"task_id", "t"}}),
      event(2, EventKind::ToolPayloadDelivered, "worker",
            Json{{"tool", "api"}, {"external", true}, {"payload", "x"}, {"correlation", "m0"}}),
      event(4, EventKind::Warning, "a", Json::object()),
  };
  const auto problems = check_invariants(events, {"worker"});
  CHECK(problems.size() == 4);
  CHECK(check_invariants({}, {}).empty());
}

TEST_CASE("scenario loading errors") {
  Json doc = load_json(fixture::bundled_scenarios()[0]);
  SUBCASE("dangling tool reference") {
    doc["core_agents"][0]["tools"].push_back("ghost");
    CHECK(code_of([&] { parse_scenario(doc); }) == ErrorCode::ScenarioInvalid);
  }
  SUBCASE("dangling profile reference") {
    doc["topology"]["front_profiles"].push_back("ghost");
    CHECK(code_of([&] { parse_scenario(doc); }) == ErrorCode::ScenarioInvalid);
  }
  SUBCASE("unknown event kind") {
    doc["assertions"] = Json::array({Json{{"kind", "event_count"}, {"event", "explosion"}}});
    CHECK(code_of([&] { parse_scenario(doc); }) == ErrorCode::ScenarioInvalid);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), Error);
  }
}

TEST_CASE("expected errors") {
  Json doc = load_json(fixture::bundled_scenarios()[0]);
  doc["step_limit"] = 2;
  doc["assertions"] = Json::array();
  auto spec = parse_scenario(doc);
  auto run = run_scenario(spec);
  CHECK(run.error_code == ErrorCode::StepLimitExceeded);
  CHECK_FALSE(run.passed(spec));
  CHECK(run.trace.size() > 0);
  doc["expect_error"] = "StepLimitExceeded";
  spec = parse_scenario(doc);
  run = run_scenario(spec);
  CHECK(run.passed(spec));
}

TEST_CASE("seed override") {
  const auto spec = load_scenario(std::string(UMF_SOURCE_DIR) + "/scenarios/la2a.json");
  const auto a = run_scenario(spec, 123);
  const auto b = run_scenario(spec, 123);
  CHECK(a.seed == 123);
  CHECK(a.trace.to_jsonl() == b.trace.to_jsonl());
}
