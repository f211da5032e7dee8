#pragma once

// Reference implementations the tests compare the library against. They are written
// for obviousness rather than speed and share no code with src/.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "umf/consensus.hpp"
#include "umf/memory.hpp"
#include "umf/planning.hpp"

namespace umf::oracle {

/// Tries every operator sequence of length 0, 1, 2, ... in lexicographic index order and
/// returns the first one whose replay ends in a goal state. Prefixes that hit an
/// inapplicable operator are skipped, since no extension of them can replay.
inline std::optional<std::vector<std::size_t>> brute_force_shortest(
    const planning::AtomSet& facts, const std::vector<planning::Operator>& ops,
    const planning::AtomSet& goal, std::size_t max_depth) {
  auto holds = [](const planning::AtomSet& state, const planning::AtomSet& atoms) {
    return std::includes(state.begin(), state.end(), atoms.begin(), atoms.end());
  };
  std::vector<std::size_t> seq;
  std::function<bool(const planning::AtomSet&, std::size_t)> extend =
      [&](const planning::AtomSet& state, std::size_t remaining) {
        if (remaining == 0) return holds(state, goal);
        for (std::size_t i = 0; i < ops.size(); ++i) {
          if (!holds(state, ops[i].preconditions)) continue;
          planning::AtomSet next = state;
          for (const auto& d : ops[i].del_effects) next.erase(d);
          for (const auto& a : ops[i].add_effects) next.insert(a);
          seq.push_back(i);
          if (extend(next, remaining - 1)) return true;
          seq.pop_back();
        }
        return false;
      };
  for (std::size_t len = 0; len <= max_depth; ++len) {
    seq.clear();
    if (extend(facts, len)) return seq;
  }
  return std::nullopt;
}

struct RandomDomain {
  planning::AtomSet facts;
  planning::AtomSet goal;
  std::vector<planning::Operator> operators;
};

/// Up to 10 atoms and 6 operators; add and delete effects are kept disjoint.
inline RandomDomain random_domain(std::uint64_t seed) {
  consensus::Rng rng(seed);
  const std::size_t n_atoms = rng.between(3, 10);
  const std::size_t n_ops = rng.between(1, 6);
  auto atom = [](std::size_t i) { return "a" + std::to_string(i); };
  auto pick_set = [&](double p) {
    planning::AtomSet s;
    for (std::size_t i = 0; i < n_atoms; ++i) {
      if (rng.unit() < p) s.insert(atom(i));
    }
    return s;
  };
  RandomDomain d;
  d.facts = pick_set(0.3);
  d.goal = pick_set(0.25);
  if (d.goal.empty()) d.goal.insert(atom(rng.between(0, n_atoms - 1)));
  for (std::size_t k = 0; k < n_ops; ++k) {
    planning::Operator op;
    op.name = "op" + std::to_string(k);
    op.preconditions = pick_set(0.2);
    op.add_effects = pick_set(0.3);
    for (const auto& a : pick_set(0.15)) {
      if (!op.add_effects.count(a)) op.del_effects.insert(a);
    }
    d.operators.push_back(std::move(op));
  }
  return d;
}

/// Keys that survive eviction down to k: sort by importance, last access and creation,
/// all descending, and keep the first k.
inline std::vector<std::string> eviction_survivors(std::vector<memory::MemoryRecord> records,
                                                   std::size_t k) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(a.importance, a.last_access_tick, a.created_tick) >
           std::make_tuple(b.importance, b.last_access_tick, b.created_tick);
  });
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < records.size() && i < k; ++i) keys.push_back(records[i].key);
  std::sort(keys.begin(), keys.end());
  return keys;
}

/// Number of distinct leaders per term, from the election event log.
inline std::size_t max_leaders_in_one_term(const std::vector<consensus::ElectionEvent>& events) {
  std::vector<std::pair<std::uint64_t, std::string>> seen;
  for (const auto& e : events) {
    if (e.kind == "leader") seen.emplace_back(e.term, e.node);
  }
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  std::size_t best = 0;
  for (std::size_t i = 0; i < seen.size();) {
    std::size_t j = i;
    while (j < seen.size() && seen[j].first == seen[i].first) ++j;
    best = std::max(best, j - i);
    i = j;
  }
  return best;
}

}  // namespace umf::oracle
