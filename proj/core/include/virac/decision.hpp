#pragma once

#include <optional>
#include <string>
#include <vector>

#include "virac/actions.hpp"
#include "virac/environment.hpp"
#include "virac/errors.hpp"
#include "virac/perception.hpp"

namespace virac {

struct SubGoal {
  std::string text;
  bool active = false;
};

// One completed decision, as remembered by the agent.
struct ActionRecord {
  double t = 0.0;
  Action action = Action::search(SearchDirection::Ahead);
  RationaleCategory rationale_category = RationaleCategory::InformationSeeking;
  std::string rationale;
  std::string subgoal;
  MovementClass movement_class = MovementClass::Exploration;
};

// Append-only action history. Timestamps must be non-decreasing.
class ActionHistory {
 public:
  void append(ActionRecord record);
  const std::vector<ActionRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  const ActionRecord& back() const { return records_.back(); }

  // Most recent record whose action is a look_at, if any.
  const ActionRecord* last_look_at() const;

 private:
  std::vector<ActionRecord> records_;
};

struct Decision {
  Action action = Action::search(SearchDirection::Ahead);
  RationaleCategory rationale_category = RationaleCategory::InformationSeeking;
  std::string rationale;
};

// Everything a decision backend may condition on for one step.
struct DecisionInput {
  double t = 0.0;
  const Observation* observation = nullptr;
  std::vector<ObjectDescription> descriptions;
  std::string goal;
  Vec3 walking_velocity;
  const ActionHistory* history = nullptr;
  const MemoryState* memory = nullptr;
  std::vector<SubGoal> subgoals;
};

class DecisionBackend {
 public:
  virtual ~DecisionBackend() = default;
  virtual std::vector<std::string> decompose_goal(const std::string& goal) = 0;
  virtual Decision choose(const DecisionInput& input) = 0;
};

// Runs the backend and validates the result: a look_at target must be
// resolvable, i.e. present in the step's descriptions or in memory.
// Throws ActionTargetError otherwise.
Decision decide(DecisionBackend& backend, const DecisionInput& input);

// A look_at at a currently visible object confirms something already seen;
// a look_at resolved purely from memory, or any search away from straight
// ahead, explores. Search ahead re-centers on the walking direction, which
// confirms the path.
MovementClass classify_movement(const Action& action,
                                const std::vector<std::string>& visible_ids);
MovementClass classify_movement(const Action& action, const Observation& observation);

// Resolves the head orientation an action asks for, using the current
// observation first and remembered positions as fallback. Search directions
// are relative to the body's facing. Throws ActionTargetError when a look_at
// target is neither visible nor remembered.
Quaternion action_target_orientation(const Action& action, const Observation& observation,
                                     const MemoryState& memory, const BodyPose& pose);

}  // namespace virac
