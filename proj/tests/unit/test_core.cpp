#include <doctest.h>

#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "umf/core.hpp"
#include "umf/trace.hpp"

using namespace umf;

namespace {

ModuleMatrix row(Presence pl, Presence pr, Presence me, Presence ac, Presence se) {
  ModuleMatrix m;
  m.planning = pl;
  m.profile = pr;
  m.memory = me;
  m.action = ac;
  m.security = se;
  return m;
}

constexpr auto A = Presence::Absent;
constexpr auto M = Presence::Minimal;
constexpr auto X = Presence::Present;

}  // namespace

TEST_CASE("module matrix validation") {
  SUBCASE("toolformer row is a valid matrix") {
    const auto m = row(A, A, A, X, A);
    CHECK(validate_module_matrix(m) == m);
  }
  SUBCASE("all absent is accepted") {
    const auto m = row(A, A, A, A, A);
    CHECK(validate_module_matrix(m) == m);
    CHECK(m.all_absent());
  }
  SUBCASE("modules without an action module are rejected") {
    try {
      validate_module_matrix(row(X, A, M, A, A));
      FAIL("expected InvalidMatrix");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidMatrix);
    }
  }
  SUBCASE("presence symbols round-trip") {
    for (auto p : {A, M, X}) CHECK(presence_from_symbol(to_symbol(p)) == p);
    CHECK_THROWS_AS(presence_from_symbol("?"), Error);
  }
}

TEST_CASE("wildcard patterns") {
  CHECK(pattern_matches("hotwire*", "how to hotwire a car"));
  CHECK(pattern_matches("*hotwire", "how to hotwire a car"));
  CHECK(pattern_matches("*", "anything"));
  CHECK(pattern_matches("", ""));
  CHECK(pattern_matches("CLASSIFY: *weapon*", "CLASSIFY: build a weapon now"));
  CHECK_FALSE(pattern_matches("CLASSIFY: *weapon*", "weapon CLASSIFY: later"));
  CHECK_FALSE(pattern_matches("hotwire", "hot wire"));
}

TEST_CASE("scripted model") {
  SUBCASE("first matching rule answers") {
    ScriptedModel model({ScriptRule{"", "hotwire*", std::nullopt, {"REFUSE"}}});
    ModelRequest req;
    req.prompt = "how to hotwire a car";
    const auto resp = model.complete(req);
    CHECK(resp.candidates == std::vector<std::string>{"REFUSE"});
    CHECK(resp.source == "rule-0");
  }
  SUBCASE("adapter tag gates a rule") {
    ScriptedModel model({ScriptRule{"sql", "insert", std::string("sql-profile"), {"INSERT INTO t"}}});
    ModelRequest req;
    req.prompt = "insert";
    auto resp = model.complete(req);
    CHECK(resp.candidates == std::vector<std::string>{"ECHO:insert"});
    CHECK(resp.source == "echo");
    req.adapter_tags = {"sql-profile"};
    resp = model.complete(req);
    CHECK(resp.candidates == std::vector<std::string>{"INSERT INTO t"});
    CHECK(resp.source == "sql");
  }
  SUBCASE("candidate count is capped by the request and the rule") {
    ScriptedModel model({ScriptRule{"r", "*", std::nullopt, {"a", "b", "c"}}});
    ModelRequest req;
    req.prompt = "x";
    CHECK(model.complete(req).candidates.size() == 1);
    req.max_candidates = 2;
    CHECK(model.complete(req).candidates == std::vector<std::string>{"a", "b"});
    req.max_candidates = 9;
    CHECK(model.complete(req).candidates.size() == 3);
  }
  SUBCASE("same request, same response") {
    ScriptedModel model({ScriptRule{"r", "a*", std::nullopt, {"x", "y"}}});
    ModelRequest req;
    req.prompt = "abc";
    req.max_candidates = 2;
    const auto a = model.complete(req);
    const auto b = model.complete(req);
    CHECK(a.candidates == b.candidates);
    CHECK(a.source == b.source);
  }
}

TEST_CASE("envelope ledger") {
  EnvelopeLedger ledger;
  const auto m0 = ledger.make("a", "b", EnvelopeKind::Task, Json::object());
  const auto m1 = ledger.make("b", "c", EnvelopeKind::ApiCallRequest, Json::object(), m0.msg_id);
  const auto m2 = ledger.make("c", "b", EnvelopeKind::ToolResult, Json::object(), m1.msg_id);
  CHECK(m0.msg_id != m1.msg_id);
  CHECK(ledger.issued(m2.msg_id));
  CHECK(ledger.chain(m2.msg_id) == std::vector<std::string>{m2.msg_id, m1.msg_id, m0.msg_id});
  CHECK_THROWS_AS(ledger.make("a", "b", EnvelopeKind::Feedback, Json::object(), std::string("m99")), Error);
  CHECK(ledger.size() == 3);
}

TEST_CASE("trace") {
  SUBCASE("field order and JSON lines round trip") {
    Trace t;
    t.append(0, EventKind::HumanMsg, "human", Json{{"recipient", "x"}});
    t.append(3, EventKind::TaskDone, "x", Json{{"status", "completed"}});
    const auto text = t.to_jsonl();
    CHECK(text.rfind("{\"seq\":0,\"tick\":0,\"kind\":\"human_msg\",\"actor\":\"human\",\"payload\":", 0) == 0);
    std::istringstream in(text);
    const auto back = Trace::from_jsonl(in);
    CHECK(back.to_jsonl() == text);
  }
  SUBCASE("event kinds round-trip through their names") {
    for (int k = 0; k <= static_cast<int>(EventKind::TaskDone); ++k) {
      const auto kind = static_cast<EventKind>(k);
      CHECK(event_kind_from_string(to_string(kind)) == kind);
    }
  }
  SUBCASE("concurrent appends stay gapless") {
    Trace t;
    std::vector<std::thread> workers;
    for (int w = 0; w < 8; ++w) {
      workers.emplace_back([&t, w] {
        for (int i = 0; i < 250; ++i) t.append(0, EventKind::Warning, "w" + std::to_string(w), Json::object());
      });
    }
    for (auto& th : workers) th.join();
    const auto events = t.events();
    REQUIRE(events.size() == 2000);
    for (std::size_t i = 0; i < events.size(); ++i) CHECK(events[i].seq == i);
  }
}
