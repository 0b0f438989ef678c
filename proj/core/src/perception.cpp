#include "virac/perception.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

namespace virac {

std::vector<ObjectDescription> perceive(PerceptionBackend& backend,
                                        const Observation& observation,
                                        const std::string& goal) {
  std::vector<ObjectDescription> described = backend.describe(observation, goal);
  std::set<std::string> seen;
  for (auto& d : described) {
    const VisibleObject* v = observation.find_visible(d.object_id);
    if (v == nullptr) {
      throw PerceptionError("description references object \"" + d.object_id +
                            "\" not present in the observation");
    }
    if (!seen.insert(d.object_id).second) {
      throw PerceptionError("duplicate description for object \"" + d.object_id + "\"");
    }
    if (d.description.empty()) {
      throw PerceptionError("empty description for object \"" + d.object_id + "\"");
    }
    if (!(d.relevance >= 0.0 && d.relevance <= 1.0)) {
      throw PerceptionError("relevance for object \"" + d.object_id +
                            "\" outside [0,1]: " + std::to_string(d.relevance));
    }
    d.position = v->position;
    d.distance = v->distance;
    d.label = v->label;
    d.observed_at = observation.t;
  }
  return described;
}

MemoryState::MemoryState(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) {
    throw InvalidInputError("memory capacity must be > 0");
  }
}

const MemoryEntry* MemoryState::find(const std::string& object_id) const {
  auto it = entries_.find(object_id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<const MemoryEntry*> MemoryState::entries() const {
  std::vector<const MemoryEntry*> out;
  out.reserve(entries_.size());
  for (const auto& [id, entry] : entries_) {
    out.push_back(&entry);
  }
  return out;
}

std::vector<const MemoryEntry*> MemoryState::recall() const {
  std::vector<const MemoryEntry*> out = entries();
  std::sort(out.begin(), out.end(), [](const MemoryEntry* a, const MemoryEntry* b) {
    if (a->relevance != b->relevance) return a->relevance > b->relevance;
    if (a->last_seen != b->last_seen) return a->last_seen > b->last_seen;
    return a->object_id < b->object_id;
  });
  return out;
}

void MemoryState::update(const std::vector<ObjectDescription>& descriptions, double t,
                         double insertion_threshold) {
  for (const auto& d : descriptions) {
    auto it = entries_.find(d.object_id);
    if (it != entries_.end()) {
      MemoryEntry& e = it->second;
      e.last_seen = t;
      e.times_seen += 1;
      e.description = d.description;
      e.relevance = d.relevance;
      e.last_position = d.position;
      e.label = d.label;
      continue;
    }
    if (d.relevance < insertion_threshold) {
      continue;  // the threshold gates insertion only, never refresh
    }
    MemoryEntry e;
    e.object_id = d.object_id;
    e.label = d.label;
    e.description = d.description;
    e.relevance = d.relevance;
    e.first_seen = t;
    e.last_seen = t;
    e.times_seen = 1;
    e.last_position = d.position;
    entries_.emplace(d.object_id, std::move(e));
  }
  while (entries_.size() > capacity_) {
    auto victim = entries_.begin();
    for (auto it = std::next(entries_.begin()); it != entries_.end(); ++it) {
      const MemoryEntry& a = it->second;
      const MemoryEntry& b = victim->second;
      const bool lower = a.relevance != b.relevance ? a.relevance < b.relevance
                         : a.last_seen != b.last_seen ? a.last_seen < b.last_seen
                                                      : a.object_id < b.object_id;
      if (lower) {
        victim = it;
      }
    }
    entries_.erase(victim);
  }
}

void MemoryState::mark_focused(const std::string& object_id, double t) {
  auto it = entries_.find(object_id);
  if (it != entries_.end()) {
    it->second.last_focused = t;
  }
}

std::string MemoryState::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [id, e] : entries_) {  // std::map iterates in id order
    nlohmann::json j;
    j["object_id"] = e.object_id;
    j["label"] = e.label;
    j["description"] = e.description;
    j["relevance"] = e.relevance;
    j["first_seen"] = e.first_seen;
    j["last_seen"] = e.last_seen;
    j["times_seen"] = e.times_seen;
    j["last_position"] = {e.last_position.x, e.last_position.y, e.last_position.z};
    j["last_focused"] = e.last_focused;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

}  // namespace virac
