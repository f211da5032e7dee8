#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "umf/core.hpp"

namespace umf::memory {

inline constexpr std::size_t kEmbeddingDim = 64;
using Embedding = std::array<double, kEmbeddingDim>;

/// Character-trigram hashing embedding: lowercase, slide a 3-byte window, FNV-1a hash
/// each trigram into one of 64 buckets, count, then scale to unit length.
/// Texts shorter than three characters map to the zero vector.
Embedding embed(std::string_view text);

/// Cosine similarity; 0 when either vector is zero.
double cosine(const Embedding& a, const Embedding& b);

enum class Format { NaturalLanguage, TabularRow, Embedding, StructuredListNode };
enum class Location { Embedded, Extension };

std::string_view to_string(Format f);
Format format_from_string(std::string_view s);
std::string_view to_string(Location l);
Location location_from_string(std::string_view s);

/// short_term records belong to exactly one task; long_term records to none.
struct Scope {
  std::optional<std::string> task_id;

  static Scope long_term() { return {}; }
  static Scope short_term(std::string task) { return Scope{std::move(task)}; }
  bool is_long_term() const { return !task_id.has_value(); }
  friend bool operator==(const Scope&, const Scope&) = default;
};

struct MemoryRecord {
  std::string key;
  Json content;
  Format format = Format::NaturalLanguage;
  Scope scope;
  double importance = 0.5;
  std::uint64_t created_tick = 0;
  std::uint64_t last_access_tick = 0;

  // Tabular rows carry the table name; structured-list nodes carry their parent key.
  std::optional<std::string> table;
  std::optional<std::string> parent_key;
  // Populated for Format::Embedding records from the content text at write time.
  std::optional<Embedding> vector;
};

/// Text used for embedding and similarity: strings verbatim, anything else dumped.
std::string content_text(const Json& content);

struct ByKey {
  std::string key;
};
struct ByFilter {
  std::optional<Scope> scope;
  std::optional<Format> format;
};
struct BySimilarity {
  std::string text;
  std::size_t top_n = 1;
};
using Query = std::variant<ByKey, ByFilter, BySimilarity>;

/// Keyed record store with a logical clock and a hard capacity.
///
/// Every public mutating or reading call advances the clock by one tick; writes stamp
/// created/last-access ticks and reads refresh last-access on returned records. After
/// any call returns, size() <= capacity(). A store is single-writer: callers that share
/// one across threads must serialize access.
class MemoryStore {
 public:
  MemoryStore(Location location, std::size_t capacity);

  /// Inserts or overwrites record.key; evicts down to capacity before returning.
  /// The record just written is never the eviction victim, so a read by key
  /// immediately after a write always finds it.
  void write(MemoryRecord record);
  std::vector<MemoryRecord> read(const Query& query);
  /// Evicts lowest importance first, then least recently accessed, then oldest.
  void forget_enforce();
  /// Drops every short-term record owned by task_id.
  void end_task_scope(std::string_view task_id);
  /// Changes the capacity and immediately enforces it.
  void set_capacity(std::size_t capacity);

  // Tabular rows ("SQL database" format): equality-filtered select and delete.
  void insert_row(const std::string& table, const std::string& key, const Json& row,
                  Scope scope = Scope::long_term(), double importance = 0.5);
  std::vector<MemoryRecord> select_rows(const std::string& table, const Json& where);
  std::size_t delete_rows(const std::string& table, const Json& where);

  // Structured lists: children of a node in insertion order.
  std::vector<MemoryRecord> children(const std::string& parent_key);

  Location location() const { return location_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return records_.size(); }
  std::uint64_t clock() const { return clock_; }
  bool contains(const std::string& key) const { return records_.count(key) != 0; }
  const std::map<std::string, MemoryRecord>& records() const { return records_; }

  Json to_json() const;

 private:
  std::uint64_t tick() { return ++clock_; }
  void evict_over_capacity(const std::string* protected_key);
  void touch(MemoryRecord& record, std::uint64_t now);

  Location location_;
  std::size_t capacity_;
  std::map<std::string, MemoryRecord> records_;
  std::uint64_t clock_ = 0;
  // Monotonic insertion counter used to order structured-list children.
  std::map<std::string, std::uint64_t> inserted_at_;
  std::uint64_t insertions_ = 0;
};

Json to_json(const MemoryRecord& record);

}  // namespace umf::memory
