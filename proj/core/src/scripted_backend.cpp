#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "virac/backends.hpp"

namespace virac {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string describe_object(const VisibleObject& v) {
  const long az_deg = std::lround(v.bearing.azimuth * 180.0 / kPi);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s at %ld°, %.1f m", v.label.c_str(), az_deg,
                v.distance);
  std::string text = buf;
  if (v.is_moving) {
    text += ", moving";
  }
  if (v.tags.count(ObjectTag::Hazard)) {
    text += ", hazard";
  }
  return text;
}

double last_fired(const ActionHistory& history, RationaleCategory category) {
  double t = -std::numeric_limits<double>::infinity();
  for (const auto& r : history.records()) {
    if (r.rationale_category == category) {
      t = r.t;
    }
  }
  return t;
}

bool focused_within(const ActionHistory& history, const std::string& id, double now,
                    double window) {
  for (const auto& r : history.records()) {
    if (r.action.is_look_at() && r.action.as_look_at().object_id == id &&
        now - r.t < window) {
      return true;
    }
  }
  return false;
}

// Tie-break shared by every object-picking rule: more relevant, then nearer,
// then lexicographically smaller id.
const ObjectDescription* pick_best(const std::vector<const ObjectDescription*>& candidates) {
  const ObjectDescription* best = nullptr;
  for (const ObjectDescription* d : candidates) {
    if (best == nullptr || d->relevance > best->relevance ||
        (d->relevance == best->relevance &&
         (d->distance < best->distance ||
          (d->distance == best->distance && d->object_id < best->object_id)))) {
      best = d;
    }
  }
  return best;
}

bool has_tag(const ObjectDescription& d, const std::string& tag) {
  return std::find(d.rationale_tags.begin(), d.rationale_tags.end(), tag) !=
         d.rationale_tags.end();
}

struct SectorStaleness {
  SearchDirection direction;
  double last_searched;  // run start when never searched
};

// "ahead" is excluded: it is the habitual glance, not a scan sector.
SearchDirection stalest_sector(const ActionHistory& history) {
  const std::array<SearchDirection, 5> order = {SearchDirection::Behind, SearchDirection::Left,
                                                SearchDirection::Right, SearchDirection::Up,
                                                SearchDirection::Down};
  SearchDirection best = order[0];
  double best_t = std::numeric_limits<double>::infinity();
  for (SearchDirection dir : order) {
    double last = 0.0;  // never visited counts from the run start
    for (const auto& r : history.records()) {
      if (r.action.is_search() && r.action.as_search().direction == dir) {
        last = r.t;
      }
    }
    if (last < best_t) {  // strict: earlier entries in `order` win ties
      best_t = last;
      best = dir;
    }
  }
  return best;
}

double sector_staleness(const ActionHistory& history, SearchDirection dir, double now) {
  double last = 0.0;
  for (const auto& r : history.records()) {
    if (r.action.is_search() && r.action.as_search().direction == dir) {
      last = r.t;
    }
  }
  return now - last;
}

}  // namespace

std::vector<ObjectDescription> ScriptedPolicy::describe(const Observation& observation,
                                                        const std::string& /*goal*/) {
  std::vector<ObjectDescription> out;
  for (const auto& v : observation.visible) {
    if (v.salience < kMinSalience) {
      continue;
    }
    ObjectDescription d;
    d.object_id = v.object_id;
    d.description = describe_object(v);
    const double hazard = v.tags.count(ObjectTag::Hazard) ? 1.0 : 0.0;
    const double goal_rel = v.tags.count(ObjectTag::GoalRelevant) ? 1.0 : 0.0;
    const double motion = v.is_moving ? 1.0 : 0.0;
    const double proximity = 1.0 / (1.0 + v.distance / 10.0);
    d.relevance = std::clamp(kHazardWeight * hazard + kGoalWeight * goal_rel +
                                 kSalienceWeight * v.salience + kMotionWeight * motion +
                                 kProximityWeight * proximity,
                             0.0, 1.0);
    if (hazard > 0.0) d.rationale_tags.push_back("hazard");
    if (goal_rel > 0.0) d.rationale_tags.push_back("goal");
    if (motion > 0.0) d.rationale_tags.push_back("moving");
    if (v.tags.count(ObjectTag::Social)) d.rationale_tags.push_back("social");
    if (v.tags.count(ObjectTag::Signage)) d.rationale_tags.push_back("signage");
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<std::string> ScriptedPolicy::decompose_goal(const std::string& goal) {
  return {
      "scan the surroundings to get oriented",
      "locate objects relevant to: " + goal,
      "watch for hazards along the way",
      "complete: " + goal,
  };
}

Decision ScriptedPolicy::choose(const DecisionInput& input) {
  if (input.history == nullptr || input.memory == nullptr) {
    throw InvalidInputError("scripted decision requires history and memory");
  }
  const ActionHistory& history = *input.history;
  const double now = input.t;

  auto eligible = [&](const ObjectDescription& d) {
    return !focused_within(history, d.object_id, now, kFocusRepeatWindow);
  };

  // 1. Safety: an unchecked hazard outranks everything.
  if (now - last_fired(history, RationaleCategory::Safety) >= kSafetyCooldown) {
    std::vector<const ObjectDescription*> hazards;
    for (const auto& d : input.descriptions) {
      if (has_tag(d, "hazard") && eligible(d)) {
        hazards.push_back(&d);
      }
    }
    if (const ObjectDescription* best = pick_best(hazards)) {
      return {Action::look_at(best->object_id), RationaleCategory::Safety,
              "checking " + best->label + ", potential hazard"};
    }
  }

  // 2. Goal-relevant object.
  if (now - last_fired(history, RationaleCategory::InformationSeeking) >= kGoalCooldown) {
    std::vector<const ObjectDescription*> goals;
    for (const auto& d : input.descriptions) {
      if (has_tag(d, "goal") && eligible(d)) {
        goals.push_back(&d);
      }
    }
    if (const ObjectDescription* best = pick_best(goals)) {
      return {Action::look_at(best->object_id), RationaleCategory::InformationSeeking,
              "locating " + best->label + " for the current goal"};
    }
  }

  // 3. Interest: something moving, or never seen before.
  if (now - last_fired(history, RationaleCategory::Interest) >= kInterestCooldown) {
    std::vector<const ObjectDescription*> interests;
    for (const auto& d : input.descriptions) {
      const bool moving = has_tag(d, "moving");
      const bool novel = input.memory->find(d.object_id) == nullptr;
      if ((moving || novel) && eligible(d)) {
        interests.push_back(&d);
      }
    }
    if (const ObjectDescription* best = pick_best(interests)) {
      const bool moving = has_tag(*best, "moving");
      return {Action::look_at(best->object_id), RationaleCategory::Interest,
              "drawn to " + best->label + (moving ? ", it is moving" : ", not seen before")};
    }
  }

  // 4. Stale sector scan.
  {
    const SearchDirection dir = stalest_sector(history);
    const bool cooled =
        now - last_fired(history, RationaleCategory::InformationSeeking) >= kStaleSearchCooldown;
    if (cooled && sector_staleness(history, dir, now) >= kStalenessWindow) {
      return {Action::search(dir), RationaleCategory::InformationSeeking,
              std::string("scanning ") + to_string(dir) + ", not checked recently"};
    }
  }

  // 5. Habitual glance along the walking direction.
  if (now - last_fired(history, RationaleCategory::Habit) >= kHabitCooldown) {
    return {Action::search(SearchDirection::Ahead), RationaleCategory::Habit,
            "glancing back along the walking path"};
  }

  // 6. Social acknowledgement.
  if (now - last_fired(history, RationaleCategory::SocialSchema) >= kSocialCooldown) {
    std::vector<const ObjectDescription*> socials;
    for (const auto& d : input.descriptions) {
      if (has_tag(d, "social") && eligible(d)) {
        socials.push_back(&d);
      }
    }
    if (const ObjectDescription* best = pick_best(socials)) {
      return {Action::look_at(best->object_id), RationaleCategory::SocialSchema,
              "acknowledging " + best->label};
    }
  }

  // Fallback: sweep the stalest sector regardless of cooldowns.
  const SearchDirection dir = stalest_sector(history);
  return {Action::search(dir), RationaleCategory::InformationSeeking,
          std::string("sweeping ") + to_string(dir) + " for anything new"};
}

}  // namespace virac
