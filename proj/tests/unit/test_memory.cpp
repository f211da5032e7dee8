#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "oracles.hpp"
#include "umf/consensus.hpp"
#include "umf/memory.hpp"

using namespace umf;
using namespace umf::memory;

namespace {

MemoryRecord rec(std::string key, Json content, double importance = 0.5,
                 Scope scope = Scope::long_term(), Format format = Format::NaturalLanguage) {
  MemoryRecord r;
  r.key = std::move(key);
  r.content = std::move(content);
  r.importance = importance;
  r.scope = std::move(scope);
  r.format = format;
  return r;
}

std::vector<std::string> keys_of(const MemoryStore& store) {
  std::vector<std::string> keys;
  for (const auto& [k, _] : store.records()) keys.push_back(k);
  return keys;
}

}  // namespace

TEST_CASE("trigram embedding matches the offline oracle") {
  // Values from tests/oracles/embedding_oracle.py.
  CHECK(cosine(embed("abcabc"), embed("abc")) == doctest::Approx(0.816496580928).epsilon(1e-9));
  CHECK(cosine(embed("abcabc"), embed("xyz")) == doctest::Approx(0.0));
  CHECK(cosine(embed("the cat"), embed("the cat sat")) == doctest::Approx(0.745355992500).epsilon(1e-9));
  CHECK(cosine(embed("the cat"), embed("stock prices")) == doctest::Approx(0.0));
  CHECK(cosine(embed("abcabc"), embed("abc")) > cosine(embed("abcabc"), embed("xyz")));

  SUBCASE("short texts and case") {
    const auto zero = embed("ab");
    CHECK(std::all_of(zero.begin(), zero.end(), [](double x) { return x == 0.0; }));
    CHECK(cosine(zero, embed("abc")) == 0.0);
    CHECK(cosine(embed("Hello World"), embed("hello world")) == doctest::Approx(1.0));
  }
}

TEST_CASE("eviction") {
  SUBCASE("lowest importance goes first") {
    MemoryStore store(Location::Embedded, 2);
    store.write(rec("a", "x", 0.9));
    store.write(rec("b", "y", 0.1));
    store.write(rec("c", "z", 0.5));
    CHECK(keys_of(store) == std::vector<std::string>{"a", "c"});
  }
  SUBCASE("the record just written survives even at the lowest importance") {
    MemoryStore store(Location::Embedded, 1);
    store.write(rec("a", "x", 0.9));
    store.write(rec("b", "y", 0.1));
    CHECK(keys_of(store) == std::vector<std::string>{"b"});
    CHECK(store.read(ByKey{"b"}).size() == 1);
  }
  SUBCASE("equal importance: least recently accessed goes first") {
    MemoryStore store(Location::Embedded, 2);
    store.write(rec("a", "x"));
    store.write(rec("b", "y"));
    store.read(ByKey{"a"});
    store.write(rec("c", "z"));
    CHECK(keys_of(store) == std::vector<std::string>{"a", "c"});
  }
  SUBCASE("20 random records shrunk to 5 match the sorting oracle") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      consensus::Rng rng(seed);
      MemoryStore store(Location::Extension, 20);
      for (int i = 0; i < 20; ++i) {
        store.write(rec("k" + std::to_string(i), i, static_cast<double>(rng.between(0, 4)) / 4.0));
      }
      for (int i = 0; i < 8; ++i) store.read(ByKey{"k" + std::to_string(rng.between(0, 19))});
      std::vector<MemoryRecord> snapshot;
      for (const auto& [_, r] : store.records()) snapshot.push_back(r);
      const auto expected = oracle::eviction_survivors(snapshot, 5);
      store.set_capacity(5);
      CHECK(keys_of(store) == expected);
    }
  }
  CHECK_THROWS_AS(MemoryStore(Location::Embedded, 0), Error);
}

TEST_CASE("reads") {
  MemoryStore store(Location::Embedded, 10);
  store.write(rec("cat", "the cat sat", 0.5, Scope::long_term(), Format::Embedding));
  store.write(rec("stock", "stock prices", 0.5, Scope::long_term(), Format::Embedding));
  store.write(rec("note", "the cat again", 0.5, Scope::long_term(), Format::NaturalLanguage));

  SUBCASE("similarity") {
    const auto hits = store.read(BySimilarity{"the cat", 1});
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].key == "cat");
    CHECK(store.read(BySimilarity{"the cat", 5}).size() == 2);
    CHECK_THROWS_AS(store.read(BySimilarity{"x", 0}), Error);
  }
  SUBCASE("read refreshes last access") {
    const auto before = store.records().at("stock").last_access_tick;
    store.read(ByKey{"stock"});
    const auto& after = store.records().at("stock");
    CHECK(after.last_access_tick > before);
    CHECK(after.last_access_tick >= after.created_tick);
    CHECK(store.read(ByKey{"missing"}).empty());
  }
  SUBCASE("filter by format in creation order") {
    const auto hits = store.read(ByFilter{std::nullopt, Format::Embedding});
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].key == "cat");
  }
  SUBCASE("every call advances the clock") {
    const auto c = store.clock();
    store.read(ByKey{"cat"});
    store.forget_enforce();
    CHECK(store.clock() == c + 2);
  }
}

TEST_CASE("end_task_scope removes exactly that task's short-term records") {
  consensus::Rng rng(5);
  MemoryStore store(Location::Embedded, 100);
  std::set<std::string> t1, others;
  for (int i = 0; i < 40; ++i) {
    const auto key = "r" + std::to_string(i);
    switch (rng.between(0, 2)) {
      case 0:
        store.write(rec(key, i, 0.5, Scope::short_term("t1")));
        t1.insert(key);
        break;
      case 1:
        store.write(rec(key, i, 0.5, Scope::short_term("t2")));
        others.insert(key);
        break;
      default:
        store.write(rec(key, i));
        others.insert(key);
    }
  }
  store.end_task_scope("t1");
  const auto left = keys_of(store);
  CHECK(std::set<std::string>(left.begin(), left.end()) == others);
  for (const auto& k : t1) CHECK_FALSE(store.contains(k));
}

TEST_CASE("tables and structured lists") {
  MemoryStore store(Location::Extension, 10);
  store.insert_row("apis", "a1", Json{{"name", "FX"}, {"category", "finance"}});
  store.insert_row("apis", "a2", Json{{"name", "Weather"}, {"category", "weather"}});
  store.insert_row("other", "o1", Json{{"category", "finance"}});
  auto rows = store.select_rows("apis", Json{{"category", "finance"}});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].key == "a1");
  CHECK(rows[0].table == std::optional<std::string>("apis"));
  CHECK(store.select_rows("apis", Json::object()).size() == 2);
  CHECK(store.delete_rows("apis", Json{{"name", "Weather"}}) == 1);
  CHECK(store.select_rows("apis", Json::object()).size() == 1);

  for (const char* k : {"z", "m", "a"}) {
    auto r = rec(k, k, 0.5, Scope::long_term(), Format::StructuredListNode);
    r.parent_key = "root";
    store.write(std::move(r));
  }
  const auto kids = store.children("root");
  REQUIRE(kids.size() == 3);
  CHECK(kids[0].key == "z");
  CHECK(kids[2].key == "a");
}

TEST_CASE("capacity and read-after-write hold over random sequences") {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    consensus::Rng rng(seed);
    const std::size_t cap = rng.between(1, 8);
    MemoryStore store(Location::Embedded, cap);
    for (int op = 0; op < 60; ++op) {
      const auto key = "k" + std::to_string(rng.between(0, 15));
      switch (rng.between(0, 3)) {
        case 0: {
          store.write(rec(key, op, static_cast<double>(rng.between(0, 3)) / 3.0,
                          rng.unit() < 0.5 ? Scope::short_term("t" + std::to_string(rng.between(0, 2)))
                                           : Scope::long_term()));
          const auto back = store.read(ByKey{key});
          REQUIRE(back.size() == 1);
          CHECK(back[0].content == Json(op));
          break;
        }
        case 1: store.read(ByKey{key}); break;
        case 2: store.end_task_scope("t" + std::to_string(rng.between(0, 2))); break;
        default: store.forget_enforce();
      }
      CHECK(store.size() <= cap);
    }
  }
}

TEST_CASE("names and dump") {
  for (auto f : {Format::NaturalLanguage, Format::TabularRow, Format::Embedding, Format::StructuredListNode}) {
    CHECK(format_from_string(to_string(f)) == f);
  }
  CHECK(location_from_string("extension") == Location::Extension);
  MemoryStore store(Location::Embedded, 2);
  store.write(rec("a", "x", 0.5, Scope::short_term("t1")));
  const auto j = store.to_json();
  CHECK(j.dump().find("\"a\"") != std::string::npos);
}
