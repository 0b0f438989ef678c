#include "virac/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace virac {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

const std::set<std::string> kEnvironmentKinds = {"bus", "cafe", "crosswalk", "mall", "street"};

Vec3 parse_vec3(const json& j, const std::string& field, std::vector<Diagnostic>& diags) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number()) {
    diags.push_back({field, "expected an array of 3 numbers"});
    return {};
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where, std::vector<Diagnostic>& diags) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      diags.push_back({where + "." + item.key(), "unknown key"});
    }
  }
}

double get_number(const json& obj, const std::string& key, const std::string& where,
                  std::vector<Diagnostic>& diags, double fallback = 0.0) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    diags.push_back({where + "." + key, "missing or non-numeric"});
    return fallback;
  }
  return obj[key].get<double>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where,
                       std::vector<Diagnostic>& diags) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    diags.push_back({where + "." + key, "missing or non-string"});
    return {};
  }
  return obj[key].get<std::string>();
}

SceneObject parse_object(const json& j, const std::string& where,
                         std::vector<Diagnostic>& diags) {
  SceneObject obj;
  if (!j.is_object()) {
    diags.push_back({where, "expected an object"});
    return obj;
  }
  check_keys(j, {"id", "label", "center", "radius", "tags", "salience", "waypoints"}, where,
             diags);
  obj.id = get_string(j, "id", where, diags);
  obj.label = get_string(j, "label", where, diags);
  if (j.contains("center")) {
    obj.center = parse_vec3(j["center"], where + ".center", diags);
  } else {
    diags.push_back({where + ".center", "missing"});
  }
  obj.radius = get_number(j, "radius", where, diags, 0.5);
  if (obj.radius <= 0.0) {
    diags.push_back({where + ".radius", "must be > 0"});
  }
  obj.salience = get_number(j, "salience", where, diags, 0.5);
  if (obj.salience < 0.0 || obj.salience > 1.0) {
    diags.push_back({where + ".salience", "must be in [0,1]"});
  }
  if (!j.contains("tags") || !j["tags"].is_array()) {
    diags.push_back({where + ".tags", "missing or non-array"});
  } else {
    for (const auto& t : j["tags"]) {
      if (!t.is_string()) {
        diags.push_back({where + ".tags", "tag entries must be strings"});
        continue;
      }
      try {
        obj.tags.insert(object_tag_from_string(t.get<std::string>()));
      } catch (const ParseError&) {
        diags.push_back({where + ".tags", "unknown tag \"" + t.get<std::string>() + "\""});
      }
    }
  }
  if (j.contains("waypoints")) {
    if (!j["waypoints"].is_array()) {
      diags.push_back({where + ".waypoints", "expected an array"});
    } else {
      double prev_t = -1.0;
      std::size_t i = 0;
      for (const auto& w : j["waypoints"]) {
        const std::string wh = where + ".waypoints[" + std::to_string(i) + "]";
        if (!w.is_object()) {
          diags.push_back({wh, "expected an object"});
          ++i;
          continue;
        }
        check_keys(w, {"t", "position"}, wh, diags);
        Waypoint wp;
        wp.t = get_number(w, "t", wh, diags);
        if (w.contains("position")) {
          wp.position = parse_vec3(w["position"], wh + ".position", diags);
        } else {
          diags.push_back({wh + ".position", "missing"});
        }
        if (wp.t <= prev_t) {
          diags.push_back({wh + ".t", "waypoint times must be strictly increasing"});
        }
        prev_t = wp.t;
        obj.waypoints.push_back(wp);
        ++i;
      }
    }
  }
  return obj;
}

std::vector<Diagnostic> parse_scenario(const json& j, Scenario& out) {
  std::vector<Diagnostic> diags;
  if (!j.is_object()) {
    diags.push_back({"$", "scenario root must be a JSON object"});
    return diags;
  }
  check_keys(j,
             {"name", "environment_kind", "condition", "goal", "duration_s", "seed", "objects",
              "body_trajectory"},
             "$", diags);
  out.name = get_string(j, "name", "$", diags);
  out.environment_kind = get_string(j, "environment_kind", "$", diags);
  if (!out.environment_kind.empty() && !kEnvironmentKinds.count(out.environment_kind)) {
    diags.push_back({"$.environment_kind",
                     "\"" + out.environment_kind + "\" not one of bus|cafe|crosswalk|mall|street"});
  }
  const std::string cond = get_string(j, "condition", "$", diags);
  if (cond == "MDC") {
    out.condition = Condition::MDC;
  } else if (cond == "APC") {
    out.condition = Condition::APC;
  } else if (!cond.empty()) {
    diags.push_back({"$.condition", "\"" + cond + "\" not one of MDC|APC"});
  }
  out.goal = get_string(j, "goal", "$", diags);
  out.duration_s = get_number(j, "duration_s", "$", diags, 60.0);
  if (out.duration_s <= 0.0) {
    diags.push_back({"$.duration_s", "must be > 0"});
  }
  if (!j.contains("seed") || !j["seed"].is_number_unsigned()) {
    diags.push_back({"$.seed", "missing or not an unsigned integer"});
  } else {
    out.seed = j["seed"].get<std::uint64_t>();
  }

  if (!j.contains("objects") || !j["objects"].is_array()) {
    diags.push_back({"$.objects", "missing or non-array"});
  } else {
    std::set<std::string> seen_ids;
    std::size_t i = 0;
    for (const auto& o : j["objects"]) {
      const std::string where = "$.objects[" + std::to_string(i) + "]";
      SceneObject obj = parse_object(o, where, diags);
      if (!obj.id.empty() && !seen_ids.insert(obj.id).second) {
        diags.push_back({where + ".id", "duplicate object id \"" + obj.id + "\""});
      }
      out.objects.push_back(std::move(obj));
      ++i;
    }
  }

  if (!j.contains("body_trajectory") || !j["body_trajectory"].is_array() ||
      j["body_trajectory"].empty()) {
    diags.push_back({"$.body_trajectory", "missing, non-array, or empty"});
  } else {
    double prev_t = -1.0;
    std::size_t i = 0;
    for (const auto& s : j["body_trajectory"]) {
      const std::string where = "$.body_trajectory[" + std::to_string(i) + "]";
      if (!s.is_object()) {
        diags.push_back({where, "expected an object"});
        ++i;
        continue;
      }
      check_keys(s, {"t", "position", "facing_yaw"}, where, diags);
      BodySample sample;
      sample.t = get_number(s, "t", where, diags);
      if (sample.t < 0.0) {
        diags.push_back({where + ".t", "must be >= 0"});
      }
      if (s.contains("position")) {
        sample.position = parse_vec3(s["position"], where + ".position", diags);
      } else {
        diags.push_back({where + ".position", "missing"});
      }
      sample.facing_yaw = get_number(s, "facing_yaw", where, diags);
      if (sample.t <= prev_t) {
        diags.push_back({where + ".t", "body samples must be time-sorted (strictly increasing)"});
      }
      prev_t = sample.t;
      out.body_trajectory.push_back(sample);
      ++i;
    }
  }
  return diags;
}

}  // namespace

const char* to_string(ObjectTag tag) {
  switch (tag) {
    case ObjectTag::Hazard: return "hazard";
    case ObjectTag::Distractor: return "distractor";
    case ObjectTag::GoalRelevant: return "goal_relevant";
    case ObjectTag::Social: return "social";
    case ObjectTag::Signage: return "signage";
    case ObjectTag::Dynamic: return "dynamic";
  }
  return "hazard";
}

ObjectTag object_tag_from_string(const std::string& s) {
  if (s == "hazard") return ObjectTag::Hazard;
  if (s == "distractor") return ObjectTag::Distractor;
  if (s == "goal_relevant") return ObjectTag::GoalRelevant;
  if (s == "social") return ObjectTag::Social;
  if (s == "signage") return ObjectTag::Signage;
  if (s == "dynamic") return ObjectTag::Dynamic;
  throw ParseError("unknown object tag: \"" + s + "\"");
}

const char* to_string(Condition c) { return c == Condition::MDC ? "MDC" : "APC"; }

Condition condition_from_string(const std::string& s) {
  if (s == "MDC") return Condition::MDC;
  if (s == "APC") return Condition::APC;
  throw ParseError("unknown condition: \"" + s + "\"");
}

Vec3 SceneObject::position_at(double t) const {
  if (waypoints.empty()) {
    return center;
  }
  if (t <= waypoints.front().t) {
    return waypoints.front().position;
  }
  if (t >= waypoints.back().t) {
    return waypoints.back().position;
  }
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    if (t <= waypoints[i].t) {
      const Waypoint& a = waypoints[i - 1];
      const Waypoint& b = waypoints[i];
      const double u = (t - a.t) / (b.t - a.t);
      return a.position + (b.position - a.position) * u;
    }
  }
  return waypoints.back().position;
}

bool SceneObject::moving_at(double t) const {
  if (waypoints.size() < 2) {
    return false;
  }
  if (t < waypoints.front().t || t > waypoints.back().t) {
    return false;
  }
  // Moving when the bracketing segment has nonzero displacement.
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    if (t <= waypoints[i].t) {
      return norm(waypoints[i].position - waypoints[i - 1].position) > 1e-9;
    }
  }
  return false;
}

const SceneObject* Scenario::find_object(const std::string& id) const {
  for (const auto& o : objects) {
    if (o.id == id) {
      return &o;
    }
  }
  return nullptr;
}

Scenario load_scenario(std::istream& source) {
  json j;
  try {
    source >> j;
  } catch (const json::exception& ex) {
    throw LoadError(std::string("scenario is not valid JSON: ") + ex.what());
  }
  Scenario scenario;
  const auto diags = parse_scenario(j, scenario);
  if (!diags.empty()) {
    throw LoadError("scenario field " + diags.front().field + ": " + diags.front().message);
  }
  return scenario;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open scenario file: " + path);
  }
  try {
    return load_scenario(in);
  } catch (const LoadError& ex) {
    throw LoadError(path + ": " + ex.what());
  }
}

std::vector<Diagnostic> validate_scenario(std::istream& source) {
  json j;
  try {
    source >> j;
  } catch (const json::exception& ex) {
    return {{"$", std::string("not valid JSON: ") + ex.what()}};
  }
  Scenario scenario;
  return parse_scenario(j, scenario);
}

BodyPose body_pose_at(const Scenario& scenario, double t) {
  const auto& traj = scenario.body_trajectory;
  BodyPose pose;
  if (traj.empty()) {
    return pose;
  }
  if (t <= traj.front().t) {
    pose.position = traj.front().position;
    pose.facing_yaw = traj.front().facing_yaw;
    return pose;  // zero velocity outside the sampled range
  }
  if (t >= traj.back().t) {
    pose.position = traj.back().position;
    pose.facing_yaw = traj.back().facing_yaw;
    return pose;
  }
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (t <= traj[i].t) {
      const BodySample& a = traj[i - 1];
      const BodySample& b = traj[i];
      const double span = b.t - a.t;
      const double u = (t - a.t) / span;
      pose.position = a.position + (b.position - a.position) * u;
      // Interpolate yaw along the shorter arc.
      double dyaw = b.facing_yaw - a.facing_yaw;
      while (dyaw > kPi) dyaw -= 2.0 * kPi;
      while (dyaw < -kPi) dyaw += 2.0 * kPi;
      pose.facing_yaw = a.facing_yaw + dyaw * u;
      pose.walking_velocity = (b.position - a.position) * (1.0 / span);
      return pose;
    }
  }
  pose.position = traj.back().position;
  pose.facing_yaw = traj.back().facing_yaw;
  return pose;
}

namespace {

// Fraction of the target's angular disc covered by the blocker's, both discs
// measured from the eye point. Planar circle-overlap on the angular radii.
double disc_occlusion(double target_ang, double blocker_ang, double separation) {
  if (separation >= target_ang + blocker_ang) {
    return 0.0;
  }
  if (blocker_ang >= target_ang + separation) {
    return 1.0;  // target disc entirely inside the blocker's
  }
  if (target_ang >= blocker_ang + separation) {
    const double ratio = blocker_ang / target_ang;
    return ratio * ratio;  // blocker disc entirely inside the target's
  }
  const double a = target_ang, b = blocker_ang, d = separation;
  const double pa = (d * d + a * a - b * b) / (2.0 * d * a);
  const double pb = (d * d + b * b - a * a) / (2.0 * d * b);
  const double lens = a * a * std::acos(std::clamp(pa, -1.0, 1.0)) +
                      b * b * std::acos(std::clamp(pb, -1.0, 1.0)) -
                      0.5 * std::sqrt(std::max(0.0, (-d + a + b) * (d + a - b) * (d - a + b) *
                                                        (d + a + b)));
  return std::clamp(lens / (kPi * a * a), 0.0, 1.0);
}

}  // namespace

std::vector<VisibleObject> visible_objects(const Scenario& scenario, double t,
                                           const Quaternion& head_orientation,
                                           const FieldOfView& fov) {
  const BodyPose pose = body_pose_at(scenario, t);
  const Vec3 eye = pose.position;

  struct Candidate {
    const SceneObject* obj;
    Vec3 position;
    double distance;
    Bearing bearing;
  };
  std::vector<Candidate> in_fov;
  for (const auto& obj : scenario.objects) {
    const Vec3 p = obj.position_at(t);
    const double d = norm(p - eye);
    if (d < 1e-9) {
      continue;  // eye inside the object's center: no bearing
    }
    const Bearing b = bearing_of(head_orientation, p, eye);
    if (std::abs(b.azimuth) <= fov.half_angle_h && std::abs(b.elevation) <= fov.half_angle_v) {
      in_fov.push_back({&obj, p, d, b});
    }
  }

  // Occlusion against every strictly nearer scenario object (in FOV or not).
  std::vector<VisibleObject> result;
  for (const auto& c : in_fov) {
    const double target_ang = std::asin(std::clamp(c.obj->radius / c.distance, 0.0, 1.0));
    const Vec3 dir = (c.position - eye) * (1.0 / c.distance);
    double occlusion = 0.0;
    for (const auto& other : scenario.objects) {
      if (other.id == c.obj->id) {
        continue;
      }
      const Vec3 op = other.position_at(t);
      const double od = norm(op - eye);
      if (od < 1e-9 || od >= c.distance) {
        continue;
      }
      const Vec3 odir = (op - eye) * (1.0 / od);
      const double cosg = std::clamp(dot(dir, odir), -1.0, 1.0);
      const double separation = std::acos(cosg);
      const double blocker_ang = std::asin(std::clamp(other.radius / od, 0.0, 1.0));
      occlusion = std::max(occlusion, disc_occlusion(target_ang, blocker_ang, separation));
      if (occlusion >= 1.0) {
        break;
      }
    }
    if (occlusion >= 1.0) {
      continue;
    }
    VisibleObject v;
    v.object_id = c.obj->id;
    v.label = c.obj->label;
    v.bearing = c.bearing;
    v.distance = c.distance;
    v.position = c.position;
    v.occlusion = occlusion;
    v.is_moving = c.obj->moving_at(t);
    v.tags = c.obj->tags;
    v.salience = c.obj->salience;
    result.push_back(std::move(v));
  }
  std::sort(result.begin(), result.end(), [](const VisibleObject& a, const VisibleObject& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.object_id < b.object_id;
  });
  return result;
}

const VisibleObject* Observation::find_visible(const std::string& id) const {
  for (const auto& v : visible) {
    if (v.object_id == id) {
      return &v;
    }
  }
  return nullptr;
}

Observation make_observation(const Scenario& scenario, double t,
                             const Quaternion& head_orientation, const FieldOfView& fov) {
  Observation obs;
  obs.t = t;
  obs.head_orientation = head_orientation;
  const BodyPose pose = body_pose_at(scenario, t);
  obs.body_position = pose.position;
  obs.walking_velocity = pose.walking_velocity;
  obs.visible = visible_objects(scenario, t, head_orientation, fov);
  obs.fov = fov;
  return obs;
}

SimulationState::SimulationState(const Scenario& sc, FieldOfView f, double omega_max)
    : scenario(&sc), t(0.0), fov(f) {
  if (!(omega_max > 0.0)) {
    throw InvalidInputError("max_angular_velocity must be > 0");
  }
  const BodyPose pose = body_pose_at(sc, 0.0);
  head.orientation = heading_quaternion(pose.facing_yaw);
  head.max_angular_velocity = omega_max;
}

void advance_tick(SimulationState& state, double dt) {
  if (!(dt > 0.0)) {
    throw InvalidInputError("advance_tick: dt must be > 0");
  }
  if (state.head.target) {
    state.head.orientation =
        slerp_step(state.head.orientation, *state.head.target, state.head.max_angular_velocity * dt);
  }
  state.t += dt;
}

Quaternion environment_target_orientation(const Scenario& scenario, const Action& action,
                                          double t) {
  const BodyPose pose = body_pose_at(scenario, t);
  if (action.is_look_at()) {
    const SceneObject* obj = scenario.find_object(action.as_look_at().object_id);
    if (obj == nullptr) {
      throw ActionTargetError("unknown object id: \"" + action.as_look_at().object_id + "\"");
    }
    const Vec3 target = obj->position_at(t);
    if (norm(target - pose.position) < 1e-9) {
      throw ActionTargetError("look_at target coincides with the agent position");
    }
    return look_rotation(pose.position, target);
  }
  // Search: body-relative azimuth/elevation offset.
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

Observation step_environment(SimulationState& state, const Action& action, double dt) {
  if (state.scenario == nullptr) {
    throw InvalidInputError("step_environment: state has no scenario");
  }
  if (!state.current_action || !(*state.current_action == action)) {
    state.head.target = environment_target_orientation(*state.scenario, action, state.t);
    state.current_action = action;
  }
  advance_tick(state, dt);
  return make_observation(*state.scenario, state.t, state.head.orientation, state.fov);
}

}  // namespace virac
