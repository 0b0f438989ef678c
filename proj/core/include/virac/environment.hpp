#pragma once

// Scenario loading, body-trajectory replay, field-of-view computation with
// sphere occlusion, and the per-tick environment update.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "virac/actions.hpp"
#include "virac/orientation.hpp"

namespace virac {

enum class ObjectTag { Hazard, Distractor, GoalRelevant, Social, Signage, Dynamic };

const char* to_string(ObjectTag tag);
ObjectTag object_tag_from_string(const std::string& s);

struct Waypoint {
  double t = 0.0;  // seconds
  Vec3 position;
};

struct SceneObject {
  std::string id;     // unique within a scenario
  std::string label;  // human-readable category ("car", "mall map", ...)
  Vec3 center;        // meters; rest position when no waypoints
  double radius = 0.5;
  std::vector<Waypoint> waypoints;  // optional motion, times strictly increasing
  std::set<ObjectTag> tags;
  double salience = 0.5;  // [0,1]

  bool has_tag(ObjectTag tag) const { return tags.count(tag) > 0; }
  // Interpolated position at time t (clamped to the first/last waypoint).
  Vec3 position_at(double t) const;
  bool moving_at(double t) const;
};

struct BodySample {
  double t = 0.0;
  Vec3 position;
  double facing_yaw = 0.0;  // radians, leftward-positive from world +Y
};

enum class Condition { MDC, APC };

const char* to_string(Condition c);
Condition condition_from_string(const std::string& s);

struct Scenario {
  std::string name;
  std::string environment_kind;  // bus | cafe | crosswalk | mall | street
  Condition condition = Condition::MDC;
  std::string goal;
  std::vector<SceneObject> objects;
  std::vector<BodySample> body_trajectory;
  double duration_s = 60.0;
  std::uint64_t seed = 0;

  const SceneObject* find_object(const std::string& id) const;
};

// One scenario-file or invariant violation, for `validate`.
struct Diagnostic {
  std::string field;
  std::string message;
};

// Strict parse + invariant checks. Throws LoadError naming the first
// offending field. Unknown keys are rejected.
Scenario load_scenario(std::istream& source);
Scenario load_scenario_file(const std::string& path);

// All violations at once (empty = valid). Tolerates malformed JSON.
std::vector<Diagnostic> validate_scenario(std::istream& source);

struct BodyPose {
  Vec3 position;
  double facing_yaw = 0.0;
  Vec3 walking_velocity;  // m/s, finite difference of the bracketing segment
};

// Linear interpolation between bracketing samples; clamps to the first/last
// sample with zero velocity outside the sampled range.
BodyPose body_pose_at(const Scenario& scenario, double t);

struct FieldOfView {
  double half_angle_h = 0.7853981633974483;  // 45 deg
  double half_angle_v = 0.6108652381980153;  // 35 deg
};

struct VisibleObject {
  std::string object_id;
  std::string label;
  Bearing bearing;      // head-local
  double distance = 0.0;
  Vec3 position;        // world-frame center at observation time
  double occlusion = 0.0;  // fraction hidden, [0,1)
  bool is_moving = false;
  std::set<ObjectTag> tags;
  double salience = 0.0;
};

struct Observation {
  double t = 0.0;
  Quaternion head_orientation;
  Vec3 body_position;
  Vec3 walking_velocity;
  std::vector<VisibleObject> visible;  // sorted by distance ascending
  FieldOfView fov;

  const VisibleObject* find_visible(const std::string& id) const;
};

// Objects inside both angular half-angles and not fully occluded, sorted by
// distance ascending. Occlusion is the angular-disc overlap fraction against
// strictly nearer objects (max over blockers).
std::vector<VisibleObject> visible_objects(const Scenario& scenario, double t,
                                           const Quaternion& head_orientation,
                                           const FieldOfView& fov);

Observation make_observation(const Scenario& scenario, double t,
                             const Quaternion& head_orientation,
                             const FieldOfView& fov);

// Single-owner per-run simulation state. Immutable scenario, mutable clock
// and head.
struct SimulationState {
  const Scenario* scenario = nullptr;
  double t = 0.0;
  HeadState head;
  FieldOfView fov;
  std::optional<Action> current_action;

  SimulationState() = default;
  SimulationState(const Scenario& sc, FieldOfView f, double omega_max);
};

// Advance the clock by dt and rotate the head one bounded step toward its
// stored target (if any). Body and dynamic objects are functions of t.
void advance_tick(SimulationState& state, double dt);

// The environment update: resolve the action's target orientation against
// the scenario (LookAt -> object center at the current time, Search ->
// body-relative direction), advance one tick, and return the new
// observation. Throws ActionTargetError for unknown LookAt ids.
Observation step_environment(SimulationState& state, const Action& action,
                             double dt);

// Target orientation the environment assigns to an action, resolved against
// scenario ground truth at time t.
Quaternion environment_target_orientation(const Scenario& scenario,
                                          const Action& action, double t);

}  // namespace virac
