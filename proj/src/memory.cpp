#include "umf/memory.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace umf::memory {

namespace {

std::uint32_t fnv1a(std::string_view bytes) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

bool row_matches(const Json& row, const Json& where) {
  if (!row.is_object()) return false;
  for (const auto& [column, value] : where.items()) {
    auto it = row.find(column);
    if (it == row.end() || *it != value) return false;
  }
  return true;
}

}  // namespace

Embedding embed(std::string_view text) {
  Embedding v{};
  const std::string lowered = to_lower(text);
  if (lowered.size() < 3) return v;
  for (std::size_t i = 0; i + 3 <= lowered.size(); ++i) {
    v[fnv1a(std::string_view(lowered).substr(i, 3)) % kEmbeddingDim] += 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

double cosine(const Embedding& a, const Embedding& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < kEmbeddingDim; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string_view to_string(Format f) {
  switch (f) {
    case Format::NaturalLanguage: return "natural_language";
    case Format::TabularRow: return "tabular_row";
    case Format::Embedding: return "embedding";
    case Format::StructuredListNode: return "structured_list_node";
  }
  return "natural_language";
}

Format format_from_string(std::string_view s) {
  if (s == "natural_language") return Format::NaturalLanguage;
  if (s == "tabular_row") return Format::TabularRow;
  if (s == "embedding") return Format::Embedding;
  if (s == "structured_list_node") return Format::StructuredListNode;
  throw Error(ErrorCode::ParseError, "unknown memory format '" + std::string(s) + "'");
}

std::string_view to_string(Location l) {
  return l == Location::Embedded ? "embedded" : "extension";
}

Location location_from_string(std::string_view s) {
  if (s == "embedded") return Location::Embedded;
  if (s == "extension") return Location::Extension;
  throw Error(ErrorCode::ParseError, "unknown memory location '" + std::string(s) + "'");
}

std::string content_text(const Json& content) {
  return content.is_string() ? content.get<std::string>() : content.dump();
}

MemoryStore::MemoryStore(Location location, std::size_t capacity)
    : location_(location), capacity_(capacity) {
  if (capacity_ == 0) throw Error(ErrorCode::InvalidCoreAgent, "memory capacity must be positive");
}

void MemoryStore::touch(MemoryRecord& record, std::uint64_t now) {
  record.last_access_tick = std::max(record.last_access_tick, now);
}

void MemoryStore::write(MemoryRecord record) {
  const std::uint64_t now = tick();
  record.created_tick = now;
  record.last_access_tick = now;
  if (record.format == Format::Embedding) {
    record.vector = embed(content_text(record.content));
  } else {
    record.vector.reset();
  }
  const std::string key = record.key;
  if (!inserted_at_.count(key)) inserted_at_[key] = insertions_++;
  records_[key] = std::move(record);
  evict_over_capacity(&key);
}

void MemoryStore::evict_over_capacity(const std::string* protected_key) {
  while (records_.size() > capacity_) {
    auto victim = records_.end();
    for (auto it = records_.begin(); it != records_.end(); ++it) {
      if (protected_key && it->first == *protected_key) continue;
      if (victim == records_.end()) {
        victim = it;
        continue;
      }
      const auto& a = it->second;
      const auto& b = victim->second;
      if (std::tie(a.importance, a.last_access_tick, a.created_tick) <
          std::tie(b.importance, b.last_access_tick, b.created_tick)) {
        victim = it;
      }
    }
    if (victim == records_.end()) break;
    inserted_at_.erase(victim->first);
    records_.erase(victim);
  }
}

void MemoryStore::forget_enforce() {
  tick();
  evict_over_capacity(nullptr);
}

void MemoryStore::set_capacity(std::size_t capacity) {
  if (capacity == 0) throw Error(ErrorCode::InvalidCoreAgent, "memory capacity must be positive");
  capacity_ = capacity;
  forget_enforce();
}

std::vector<MemoryRecord> MemoryStore::read(const Query& query) {
  const std::uint64_t now = tick();
  std::vector<MemoryRecord*> hits;

  if (const auto* q = std::get_if<ByKey>(&query)) {
    auto it = records_.find(q->key);
    if (it != records_.end()) hits.push_back(&it->second);
  } else if (const auto* q = std::get_if<ByFilter>(&query)) {
    for (auto& [key, rec] : records_) {
      if (q->scope && rec.scope != *q->scope) continue;
      if (q->format && rec.format != *q->format) continue;
      hits.push_back(&rec);
    }
    std::sort(hits.begin(), hits.end(), [](const MemoryRecord* a, const MemoryRecord* b) {
      return a->created_tick < b->created_tick;
    });
  } else {
    const auto& sim = std::get<BySimilarity>(query);
    if (sim.top_n == 0) throw Error(ErrorCode::ParseError, "similarity query needs top_n >= 1");
    const Embedding probe = embed(sim.text);
    std::vector<std::pair<double, MemoryRecord*>> scored;
    for (auto& [key, rec] : records_) {
      if (rec.format != Format::Embedding || !rec.vector) continue;
      scored.emplace_back(cosine(probe, *rec.vector), &rec);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second->created_tick < b.second->created_tick;
    });
    for (std::size_t i = 0; i < scored.size() && i < sim.top_n; ++i) hits.push_back(scored[i].second);
  }

  std::vector<MemoryRecord> out;
  out.reserve(hits.size());
  for (MemoryRecord* rec : hits) {
    touch(*rec, now);
    out.push_back(*rec);
  }
  return out;
}

void MemoryStore::end_task_scope(std::string_view task_id) {
  tick();
  for (auto it = records_.begin(); it != records_.end();) {
    if (it->second.scope.task_id && *it->second.scope.task_id == task_id) {
      inserted_at_.erase(it->first);
      it = records_.erase(it);
    } else {
      ++it;
    }
  }
}

void MemoryStore::insert_row(const std::string& table, const std::string& key, const Json& row,
                             Scope scope, double importance) {
  MemoryRecord rec;
  rec.key = key;
  rec.content = row;
  rec.format = Format::TabularRow;
  rec.scope = std::move(scope);
  rec.importance = importance;
  rec.table = table;
  write(std::move(rec));
}

std::vector<MemoryRecord> MemoryStore::select_rows(const std::string& table, const Json& where) {
  const std::uint64_t now = tick();
  std::vector<MemoryRecord*> hits;
  for (auto& [key, rec] : records_) {
    if (rec.format == Format::TabularRow && rec.table == table && row_matches(rec.content, where)) {
      hits.push_back(&rec);
    }
  }
  std::sort(hits.begin(), hits.end(), [](const MemoryRecord* a, const MemoryRecord* b) {
    return a->created_tick < b->created_tick;
  });
  std::vector<MemoryRecord> out;
  for (MemoryRecord* rec : hits) {
    touch(*rec, now);
    out.push_back(*rec);
  }
  return out;
}

std::size_t MemoryStore::delete_rows(const std::string& table, const Json& where) {
  tick();
  std::size_t removed = 0;
  for (auto it = records_.begin(); it != records_.end();) {
    const auto& rec = it->second;
    if (rec.format == Format::TabularRow && rec.table == table && row_matches(rec.content, where)) {
      inserted_at_.erase(it->first);
      it = records_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

std::vector<MemoryRecord> MemoryStore::children(const std::string& parent_key) {
  const std::uint64_t now = tick();
  std::vector<MemoryRecord*> hits;
  for (auto& [key, rec] : records_) {
    if (rec.format == Format::StructuredListNode && rec.parent_key == parent_key) {
      hits.push_back(&rec);
    }
  }
  std::sort(hits.begin(), hits.end(), [this](const MemoryRecord* a, const MemoryRecord* b) {
    return inserted_at_.at(a->key) < inserted_at_.at(b->key);
  });
  std::vector<MemoryRecord> out;
  for (MemoryRecord* rec : hits) {
    touch(*rec, now);
    out.push_back(*rec);
  }
  return out;
}

Json to_json(const MemoryRecord& record) {
  Json j;
  j["key"] = record.key;
  j["content"] = record.content;
  j["format"] = to_string(record.format);
  j["scope"] = record.scope.is_long_term() ? Json("long_term")
                                            : Json{{"short_term", *record.scope.task_id}};
  j["importance"] = record.importance;
  j["created_tick"] = record.created_tick;
  j["last_access_tick"] = record.last_access_tick;
  if (record.table) j["table"] = *record.table;
  if (record.parent_key) j["parent_key"] = *record.parent_key;
  if (record.vector) j["vector"] = *record.vector;
  return j;
}

Json MemoryStore::to_json() const {
  Json j;
  j["location"] = to_string(location_);
  j["capacity"] = capacity_;
  j["clock"] = clock_;
  Json recs = Json::array();
  for (const auto& [key, rec] : records_) recs.push_back(memory::to_json(rec));
  j["records"] = std::move(recs);
  return j;
}

}  // namespace umf::memory
