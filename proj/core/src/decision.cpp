#include "virac/decision.hpp"

#include <algorithm>
#include <cmath>

namespace virac {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void ActionHistory::append(ActionRecord record) {
  if (!records_.empty() && record.t < records_.back().t) {
    throw ContractError("action history timestamps must be non-decreasing");
  }
  records_.push_back(std::move(record));
}

const ActionRecord* ActionHistory::last_look_at() const {
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->action.is_look_at()) {
      return &*it;
    }
  }
  return nullptr;
}

Decision decide(DecisionBackend& backend, const DecisionInput& input) {
  Decision d = backend.choose(input);
  if (d.action.is_look_at()) {
    const std::string& id = d.action.as_look_at().object_id;
    const bool described = std::any_of(input.descriptions.begin(), input.descriptions.end(),
                                       [&](const ObjectDescription& o) { return o.object_id == id; });
    const bool visible = input.observation != nullptr && input.observation->find_visible(id);
    const bool remembered = input.memory != nullptr && input.memory->find(id) != nullptr;
    if (!described && !visible && !remembered) {
      throw ActionTargetError("decision targets object \"" + id +
                              "\" that is neither described, visible, nor remembered");
    }
  }
  return d;
}

MovementClass classify_movement(const Action& action,
                                const std::vector<std::string>& visible_ids) {
  if (action.is_look_at()) {
    const bool visible = std::find(visible_ids.begin(), visible_ids.end(),
                                   action.as_look_at().object_id) != visible_ids.end();
    return visible ? MovementClass::Confirmation : MovementClass::Exploration;
  }
  return action.as_search().direction == SearchDirection::Ahead ? MovementClass::Confirmation
                                                                : MovementClass::Exploration;
}

MovementClass classify_movement(const Action& action, const Observation& observation) {
  std::vector<std::string> ids;
  ids.reserve(observation.visible.size());
  for (const auto& v : observation.visible) {
    ids.push_back(v.object_id);
  }
  return classify_movement(action, ids);
}

Quaternion action_target_orientation(const Action& action, const Observation& observation,
                                     const MemoryState& memory, const BodyPose& pose) {
  if (action.is_look_at()) {
    const std::string& id = action.as_look_at().object_id;
    Vec3 target;
    if (const VisibleObject* v = observation.find_visible(id)) {
      target = v->position;
    } else if (const MemoryEntry* e = memory.find(id)) {
      target = e->last_position;
    } else {
      throw ActionTargetError("look_at target \"" + id +
                              "\" is neither visible nor remembered");
    }
    if (norm(target - pose.position) < 1e-9) {
      throw ActionTargetError("look_at target coincides with the agent position");
    }
    return look_rotation(pose.position, target);
  }
  double az = 0.0, el = 0.0;
  switch (action.as_search().direction) {
    case SearchDirection::Left: az = kPi / 2.0; break;
    case SearchDirection::Right: az = -kPi / 2.0; break;
    case SearchDirection::Behind: az = kPi; break;
    case SearchDirection::Ahead: az = 0.0; break;
    case SearchDirection::Up: el = 40.0 * kPi / 180.0; break;
    case SearchDirection::Down: el = -40.0 * kPi / 180.0; break;
  }
  const Quaternion body = heading_quaternion(pose.facing_yaw);
  const Vec3 dir = rotate(body, bearing_direction(az, el));
  return look_rotation(pose.position, pose.position + dir);
}

}  // namespace virac
