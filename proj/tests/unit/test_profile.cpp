#include <doctest.h>

#include "umf/profile.hpp"

using namespace umf;
using namespace umf::profile;

namespace {

Profile text_profile(std::string id, std::string text) {
  Profile p;
  p.profile_id = std::move(id);
  p.method = Method::HandcraftedIcl;
  p.system_text = std::move(text);
  return p;
}

Profile adapter(std::string id, std::string tag) {
  Profile p;
  p.profile_id = std::move(id);
  p.method = Method::Pluggable;
  p.adapter_tag = std::move(tag);
  return p;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("applying profiles") {
  ModelRequest req;
  req.prompt = "insert";

  SUBCASE("text profile sets the system prefix and leaves the prompt alone") {
    const auto out = apply_profile(text_profile("sql", "You are a SQL expert."), req);
    CHECK(out.system_prefix == std::optional<std::string>("You are a SQL expert."));
    CHECK(out.prompt == "insert");
    CHECK(out.adapter_tags.empty());
  }
  SUBCASE("last text profile wins") {
    auto out = apply_profile(text_profile("a", "first"), req);
    out = apply_profile(text_profile("b", "second"), out);
    CHECK(out.system_prefix == std::optional<std::string>("second"));
  }
  SUBCASE("adapters append their tag once") {
    auto out = apply_profile(adapter("lora", "lora:x"), req);
    out = apply_profile(adapter("lora", "lora:x"), out);
    out = apply_profile(adapter("other", "lora:y"), out);
    CHECK(out.adapter_tags == std::vector<std::string>{"lora:x", "lora:y"});
    CHECK_FALSE(out.system_prefix);
    CHECK(out.prompt == "insert");
  }
}

TEST_CASE("profile validation") {
  CHECK_NOTHROW(validate_profile(text_profile("ok", "text")));
  CHECK_NOTHROW(validate_profile(adapter("ok", "tag")));
  auto p = adapter("bad", "tag");
  p.system_text = "text";
  CHECK(code_of([&] { validate_profile(p); }) == ErrorCode::InvalidProfile);
  auto q = text_profile("bad", "text");
  q.system_text.reset();
  CHECK(code_of([&] { validate_profile(q); }) == ErrorCode::InvalidProfile);
  CHECK(code_of([&] { validate_profile(adapter("bad", "")); }) == ErrorCode::InvalidProfile);
  for (auto m : {Method::HandcraftedIcl, Method::LlmGenerated, Method::DatasetAligned, Method::Pluggable}) {
    CHECK(method_from_string(to_string(m)) == m);
  }
}

TEST_CASE("generated profiles") {
  ScriptedModel model({ScriptRule{"gen", "GENERATE-PROFILE:*", std::nullopt, {"You are a 30-year-old chemist."}}});
  const Json attrs{{"age", 30}, {"interest", "chemistry"}};
  const auto p = generate_profile({text_profile("seed", "You are a careful analyst.")}, attrs, model, "chemist");
  CHECK(p.profile_id == "chemist");
  CHECK(p.method == Method::LlmGenerated);
  CHECK(p.system_text == std::optional<std::string>("You are a 30-year-old chemist."));

  SUBCASE("seeds are optional") {
    const auto q = generate_profile({}, Json{{"age", 30}}, model);
    CHECK(q.system_text == std::optional<std::string>("You are a 30-year-old chemist."));
  }
  SUBCASE("no attributes") {
    CHECK(code_of([&] { generate_profile({}, Json::object(), model); }) == ErrorCode::MissingField);
  }
  SUBCASE("empty generation") {
    ScriptedModel blank({ScriptRule{"gen", "GENERATE-PROFILE:*", std::nullopt, {""}}});
    CHECK(code_of([&] { generate_profile({}, attrs, blank); }) == ErrorCode::EmptyGeneration);
  }
}

TEST_CASE("dataset-aligned profiles") {
  const auto p = align_profile(Json{{"state", "Ohio"}}, "You are a voter from {state}.");
  CHECK(p.method == Method::DatasetAligned);
  CHECK(p.system_text == std::optional<std::string>("You are a voter from Ohio."));
  CHECK(code_of([] { align_profile(Json{{"state", "Ohio"}}, "{age} years"); }) == ErrorCode::MissingField);
}
