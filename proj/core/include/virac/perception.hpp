#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "virac/environment.hpp"
#include "virac/errors.hpp"

namespace virac {

// One natural-language description of a visible object, scored for relevance
// to the agent's current goal. `position` and `distance` are carried over from
// the observation the description was produced from so downstream consumers
// can resolve targets without re-querying the environment.
struct ObjectDescription {
  std::string object_id;
  std::string description;
  double relevance = 0.0;  // in [0,1]
  std::vector<std::string> rationale_tags;
  Vec3 position;
  double distance = 0.0;
  std::string label;
  double observed_at = 0.0;
};

// Produces descriptions for the objects in an observation. Implementations
// may drop objects they judge irrelevant but must never invent ids.
class PerceptionBackend {
 public:
  virtual ~PerceptionBackend() = default;
  virtual std::vector<ObjectDescription> describe(const Observation& observation,
                                                  const std::string& goal) = 0;
};

// Validates backend output against the observation it came from, then fills in
// the positional fields. Throws PerceptionError on ids not present in the
// observation, duplicate ids, relevance outside [0,1], or empty descriptions.
std::vector<ObjectDescription> perceive(PerceptionBackend& backend,
                                        const Observation& observation,
                                        const std::string& goal);

struct MemoryEntry {
  std::string object_id;
  std::string label;
  std::string description;
  double relevance = 0.0;
  double first_seen = 0.0;
  double last_seen = 0.0;
  std::uint64_t times_seen = 0;
  Vec3 last_position;
  double last_focused = -1.0;  // last time a look_at at this object completed; -1 if never
};

// Bounded store of previously described objects, keyed by object id.
class MemoryState {
 public:
  explicit MemoryState(std::size_t capacity = 64);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }

  const MemoryEntry* find(const std::string& object_id) const;
  std::vector<const MemoryEntry*> entries() const;  // sorted by object_id

  // Known objects, most relevant first (ties: more recently seen, then id).
  std::vector<const MemoryEntry*> recall() const;

  // Folds one perception step into memory at time t. New objects are inserted
  // only when relevance >= threshold; objects already present are always
  // refreshed (last_seen, times_seen, description, relevance, position).
  // When over capacity, evicts the lowest (relevance, last_seen, id) entry.
  void update(const std::vector<ObjectDescription>& descriptions, double t,
              double insertion_threshold = 0.2);

  // Records that a look_at at this object completed at time t. Unknown ids
  // are ignored: focus does not create memory.
  void mark_focused(const std::string& object_id, double t);

  // Stable JSON rendering (array sorted by object_id) for dumps and tests.
  std::string to_json() const;

 private:
  std::size_t capacity_;
  std::map<std::string, MemoryEntry> entries_;
};

}  // namespace virac
