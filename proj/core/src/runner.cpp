#include "virac/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "virac/decision.hpp"
#include "virac/io.hpp"
#include "virac/perception.hpp"

namespace virac {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

FieldOfView fov_from(const RunConfig& config) {
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  if (!(config.fov_h_deg > 0.0) || !(config.fov_v_deg > 0.0)) {
    throw InvalidInputError("field-of-view half angles must be > 0");
  }
  return {config.fov_h_deg * kDegToRad, config.fov_v_deg * kDegToRad};
}

void check_config(const RunConfig& config) {
  if (!(config.tick_hz > 0.0)) {
    throw InvalidInputError("tick rate must be > 0");
  }
  if (!(config.resample_hz > 0.0)) {
    throw InvalidInputError("resample rate must be > 0");
  }
  if (!(config.max_angular_velocity > 0.0)) {
    throw InvalidInputError("max angular velocity must be > 0");
  }
}

json action_json(const Action& action) {
  json a;
  if (action.is_look_at()) {
    a["type"] = "look_at";
    a["object_id"] = action.as_look_at().object_id;
  } else {
    a["type"] = "search";
    a["direction"] = to_string(action.as_search().direction);
  }
  return a;
}

Action action_from_json(const json& a, std::size_t record_index) {
  const std::string where = "action log record " + std::to_string(record_index);
  if (!a.is_object() || !a.contains("type") || !a["type"].is_string()) {
    throw LoadError(where + ": action has no type");
  }
  const std::string type = a["type"].get<std::string>();
  if (type == "look_at") {
    if (!a.contains("object_id") || !a["object_id"].is_string()) {
      throw LoadError(where + ": look_at without object_id");
    }
    return Action::look_at(a["object_id"].get<std::string>());
  }
  if (type == "search") {
    if (!a.contains("direction") || !a["direction"].is_string()) {
      throw LoadError(where + ": search without direction");
    }
    return Action::search(search_direction_from_string(a["direction"].get<std::string>()));
  }
  throw LoadError(where + ": unknown action type \"" + type + "\"");
}

// Per-tick bookkeeping for the current action shared by run and replay, so a
// replayed log takes exactly the decision ticks the run took.
struct ActionProgress {
  std::optional<Action> action;
  std::optional<Quaternion> target;
  double decided_at = 0.0;
  double reached_at = -1.0;

  bool complete(double t) const {
    if (!action || reached_at < 0.0) {
      return false;
    }
    if (action->is_look_at()) {
      return t - reached_at >= kLookAtDwellS;
    }
    return true;
  }

  bool decision_due(double t) const {
    if (!action) {
      return true;
    }
    return complete(t) || t - decided_at >= kDecisionTimeoutS;
  }

  void update_reached(const Quaternion& head, double t) {
    if (action && target && reached_at < 0.0 &&
        angular_distance(head, *target) <= kReachedToleranceRad) {
      reached_at = t;
    }
  }

  void begin(Action a, Quaternion q, double t) {
    action = std::move(a);
    target = q;
    decided_at = t;
    reached_at = -1.0;
  }
};

void write_outputs(const RunResult& result, const std::string& out_dir, bool full) {
  fs::create_directories(out_dir);
  const fs::path base = fs::path(out_dir) / result.stem;
  save_trajectory_file(base.string() + ".csv", result.trajectory);
  if (!full) {
    return;
  }
  std::string log;
  for (const auto& line : result.action_log_lines) {
    log += line;
    log += '\n';
  }
  write_file_atomic(base.string() + ".actions.jsonl", log);
  write_file_atomic(base.string() + ".memory.json", result.memory_json + "\n");
  write_file_atomic(base.string() + ".manifest.json", result.manifest_json + "\n");
}

std::string make_manifest(const Scenario& scenario, const RunConfig& config,
                          const std::vector<std::string>& subgoals, std::size_t ticks,
                          const RunResult& result) {
  json m;
  m["version"] = kVersion;
  m["scenario"] = {{"name", scenario.name},
                   {"condition", to_string(scenario.condition)},
                   {"environment_kind", scenario.environment_kind},
                   {"goal", scenario.goal},
                   {"duration_s", scenario.duration_s},
                   {"seed", scenario.seed}};
  m["config"] = {{"backend", config.backend.kind == BackendKind::Remote ? "remote" : "scripted"},
                 {"endpoint", config.backend.endpoint},
                 {"model", config.backend.model},
                 {"tick_hz", config.tick_hz},
                 {"resample_hz", config.resample_hz},
                 {"fov_h_deg", config.fov_h_deg},
                 {"fov_v_deg", config.fov_v_deg},
                 {"max_angular_velocity", config.max_angular_velocity},
                 {"memory_capacity", config.memory_capacity},
                 {"seed", config.backend.seed}};
  m["subgoals"] = subgoals;
  m["ticks"] = ticks;
  m["decisions"] = result.decision_count;
  m["fallbacks"] = {{"perception", result.perception_fallbacks},
                    {"decision", result.decision_fallbacks},
                    {"decompose", result.decompose_fallbacks}};
  return m.dump(2);
}

}  // namespace

std::string scenario_stem(const Scenario& scenario) {
  return scenario.name + (scenario.condition == Condition::MDC ? "_mdc" : "_apc");
}

RunResult run(const Scenario& scenario, const RunConfig& config) {
  check_config(config);
  const FieldOfView fov = fov_from(config);
  const double dt = 1.0 / config.tick_hz;
  const auto n_ticks = static_cast<std::size_t>(std::lround(scenario.duration_s * config.tick_hz));
  if (n_ticks == 0) {
    throw InvalidInputError("scenario duration yields zero ticks");
  }

  ScriptedPolicy scripted;
  std::unique_ptr<RemoteBackend> remote;
  if (config.backend.kind == BackendKind::Remote) {
    remote = std::make_unique<RemoteBackend>(config.backend);
  }
  PerceptionBackend& perception = remote ? static_cast<PerceptionBackend&>(*remote) : scripted;
  DecisionBackend& decider = remote ? static_cast<DecisionBackend&>(*remote) : scripted;

  RunResult result;
  result.stem = scenario_stem(scenario);

  std::vector<std::string> subgoal_texts;
  if (remote) {
    try {
      subgoal_texts = remote->decompose_goal(scenario.goal);
    } catch (const BackendError&) {
      ++result.decompose_fallbacks;
    } catch (const ParseError&) {
      ++result.decompose_fallbacks;
    }
    if (subgoal_texts.empty() && result.decompose_fallbacks > 0) {
      subgoal_texts = {"accomplish: " + scenario.goal};
    }
  } else {
    subgoal_texts = scripted.decompose_goal(scenario.goal);
  }
  const double subgoal_slice = scenario.duration_s / static_cast<double>(subgoal_texts.size());

  MemoryState memory(config.memory_capacity);
  ActionHistory history;
  HeadState head;
  head.orientation = heading_quaternion(body_pose_at(scenario, 0.0).facing_yaw);
  head.max_angular_velocity = config.max_angular_velocity;
  ActionProgress progress;

  result.trajectory.samples.reserve(n_ticks);
  for (std::size_t k = 0; k < n_ticks; ++k) {
    const double t = static_cast<double>(k) / config.tick_hz;
    result.trajectory.samples.push_back({t, head.orientation});

    progress.update_reached(head.orientation, t);
    if (progress.action && progress.action->is_look_at() && progress.complete(t)) {
      memory.mark_focused(progress.action->as_look_at().object_id, t);
    }

    if (progress.decision_due(t)) {
      const BodyPose pose = body_pose_at(scenario, t);
      const Observation obs = make_observation(scenario, t, head.orientation, fov);

      bool fell_back_perception = false;
      std::vector<ObjectDescription> descriptions;
      if (remote) {
        try {
          descriptions = perceive(perception, obs, scenario.goal);
        } catch (const Error&) {
          descriptions = perceive(scripted, obs, scenario.goal);
          fell_back_perception = true;
          ++result.perception_fallbacks;
        }
      } else {
        descriptions = perceive(perception, obs, scenario.goal);
      }

      const auto active = std::min(subgoal_texts.size() - 1,
                                   static_cast<std::size_t>(std::floor(t / subgoal_slice)));
      std::vector<SubGoal> subgoals;
      subgoals.reserve(subgoal_texts.size());
      for (std::size_t i = 0; i < subgoal_texts.size(); ++i) {
        subgoals.push_back({subgoal_texts[i], i == active});
      }

      DecisionInput input;
      input.t = t;
      input.observation = &obs;
      input.descriptions = descriptions;
      input.goal = scenario.goal;
      input.walking_velocity = obs.walking_velocity;
      input.history = &history;
      input.memory = &memory;
      input.subgoals = subgoals;

      bool fell_back_decision = false;
      Decision decision;
      Quaternion target;
      if (remote) {
        try {
          decision = decide(decider, input);
          target = action_target_orientation(decision.action, obs, memory, pose);
        } catch (const Error&) {
          decision = decide(scripted, input);
          target = action_target_orientation(decision.action, obs, memory, pose);
          fell_back_decision = true;
          ++result.decision_fallbacks;
        }
      } else {
        decision = decide(decider, input);
        target = action_target_orientation(decision.action, obs, memory, pose);
      }

      const MovementClass movement = classify_movement(decision.action, obs);

      ActionRecord record;
      record.t = t;
      record.action = decision.action;
      record.rationale_category = decision.rationale_category;
      record.rationale = decision.rationale;
      record.subgoal = subgoal_texts[active];
      record.movement_class = movement;
      history.append(record);

      json line;
      line["t"] = t;
      line["action"] = action_json(decision.action);
      line["rationale_category"] = to_string(decision.rationale_category);
      line["rationale"] = decision.rationale;
      line["subgoal"] = record.subgoal;
      line["movement_class"] = to_string(movement);
      json ids = json::array();
      for (const auto& v : obs.visible) {
        ids.push_back(v.object_id);
      }
      line["visible_ids"] = std::move(ids);
      line["target_orientation"] = {target.w, target.x, target.y, target.z};
      line["fallback"] = {{"perception", fell_back_perception}, {"decision", fell_back_decision}};
      result.action_log_lines.push_back(line.dump());
      ++result.decision_count;

      memory.update(descriptions, t);
      progress.begin(decision.action, target, t);
      head.target = target;
    }

    if (head.target) {
      head.orientation =
          slerp_step(head.orientation, *head.target, head.max_angular_velocity * dt);
    }
  }

  result.memory_json = memory.to_json();
  result.manifest_json = make_manifest(scenario, config, subgoal_texts, n_ticks, result);
  if (!config.out_dir.empty()) {
    write_outputs(result, config.out_dir, true);
  }
  return result;
}

RunResult replay(const Scenario& scenario, const std::string& action_log_path,
                 const RunConfig& config) {
  check_config(config);
  const double dt = 1.0 / config.tick_hz;
  const auto n_ticks = static_cast<std::size_t>(std::lround(scenario.duration_s * config.tick_hz));

  std::vector<json> records;
  {
    std::ifstream in(action_log_path);
    if (!in) {
      throw IoError("cannot open action log: " + action_log_path);
    }
    std::string line;
    std::size_t index = 0;
    while (std::getline(in, line)) {
      if (line.empty()) {
        continue;
      }
      try {
        records.push_back(json::parse(line));
      } catch (const json::exception& ex) {
        throw LoadError("action log record " + std::to_string(index) + ": " + ex.what());
      }
      ++index;
    }
  }

  RunResult result;
  result.stem = scenario_stem(scenario);

  HeadState head;
  head.orientation = heading_quaternion(body_pose_at(scenario, 0.0).facing_yaw);
  head.max_angular_velocity = config.max_angular_velocity;
  ActionProgress progress;
  std::size_t next = 0;

  result.trajectory.samples.reserve(n_ticks);
  for (std::size_t k = 0; k < n_ticks; ++k) {
    const double t = static_cast<double>(k) / config.tick_hz;
    result.trajectory.samples.push_back({t, head.orientation});

    progress.update_reached(head.orientation, t);
    if (progress.decision_due(t)) {
      if (next >= records.size()) {
        result.truncated = true;
        std::cerr << "warning: action log " << action_log_path << " ends after " << next
                  << " record(s); trajectory stops at t=" << t << "\n";
        break;
      }
      const json& rec = records[next];
      const std::string where = "action log record " + std::to_string(next);
      if (!rec.is_object() || !rec.contains("t") || !rec["t"].is_number()) {
        throw LoadError(where + ": missing numeric t");
      }
      const double logged_t = rec["t"].get<double>();
      if (std::abs(logged_t - t) > 1e-9) {
        throw LoadError(where + ": logged time " + std::to_string(logged_t) +
                        " does not match replay decision time " + std::to_string(t));
      }
      if (!rec.contains("action")) {
        throw LoadError(where + ": missing action");
      }
      const Action action = action_from_json(rec["action"], next);
      if (action.is_look_at() &&
          scenario.find_object(action.as_look_at().object_id) == nullptr) {
        throw LoadError(where + ": unknown object id \"" + action.as_look_at().object_id +
                        "\"");
      }
      if (!rec.contains("target_orientation") || !rec["target_orientation"].is_array() ||
          rec["target_orientation"].size() != 4) {
        throw LoadError(where + ": missing target_orientation [w,x,y,z]");
      }
      Quaternion target;
      target.w = rec["target_orientation"][0].get<double>();
      target.x = rec["target_orientation"][1].get<double>();
      target.y = rec["target_orientation"][2].get<double>();
      target.z = rec["target_orientation"][3].get<double>();
      if (std::abs(norm(target) - 1.0) > 1e-6) {
        throw LoadError(where + ": target_orientation is not unit length");
      }

      progress.begin(action, target, t);
      head.target = target;
      ++next;
      ++result.decision_count;
    }

    if (head.target) {
      head.orientation =
          slerp_step(head.orientation, *head.target, head.max_angular_velocity * dt);
    }
  }

  if (!config.out_dir.empty()) {
    write_outputs(result, config.out_dir, false);
  }
  return result;
}

namespace {

struct PairKey {
  std::string scenario;
  Condition condition;
};

PairKey parse_stem(const std::string& stem) {
  const auto split = [&](const std::string& suffix, Condition c) -> std::optional<PairKey> {
    if (stem.size() > suffix.size() &&
        stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return PairKey{stem.substr(0, stem.size() - suffix.size()), c};
    }
    return std::nullopt;
  };
  if (auto k = split("_mdc", Condition::MDC)) {
    return *k;
  }
  if (auto k = split("_apc", Condition::APC)) {
    return *k;
  }
  throw InvalidInputError("trajectory stem \"" + stem +
                          "\" does not end in _mdc or _apc");
}

std::vector<std::string> csv_stems(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw IoError("not a directory: " + dir);
  }
  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      stems.push_back(entry.path().stem().string());
    }
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

std::string dir_basename(const std::string& dir) {
  fs::path p(dir);
  if (p.filename().empty() || p.filename() == ".") {
    p = p.parent_path();
  }
  return p.filename().string();
}

}  // namespace

EvaluateResult evaluate_directories(const std::string& reference_dir,
                                    const std::vector<std::string>& candidate_dirs,
                                    double resample_hz, const std::string& out_dir) {
  if (candidate_dirs.empty()) {
    throw InvalidInputError("no candidate directories given");
  }
  const std::vector<std::string> ref_stems = csv_stems(reference_dir);
  if (ref_stems.empty()) {
    throw InvalidInputError("reference directory has no .csv trajectories: " + reference_dir);
  }

  struct Pair {
    std::string scenario;
    Condition condition;
    std::string method;
    std::string ref_path;
    std::string cand_path;
  };
  std::vector<Pair> pairs;
  for (const auto& cand_dir : candidate_dirs) {
    const std::vector<std::string> cand_stems = csv_stems(cand_dir);
    std::vector<std::string> missing, extra;
    std::set_difference(ref_stems.begin(), ref_stems.end(), cand_stems.begin(),
                        cand_stems.end(), std::back_inserter(missing));
    std::set_difference(cand_stems.begin(), cand_stems.end(), ref_stems.begin(),
                        ref_stems.end(), std::back_inserter(extra));
    if (!missing.empty() || !extra.empty()) {
      std::string msg = "candidate directory " + cand_dir + " does not pair with the reference:";
      for (const auto& s : missing) {
        msg += " missing " + s + ".csv";
      }
      for (const auto& s : extra) {
        msg += " unmatched " + s + ".csv";
      }
      throw InvalidInputError(msg);
    }
    const std::string method = dir_basename(cand_dir);
    for (const auto& stem : ref_stems) {
      const PairKey key = parse_stem(stem);
      pairs.push_back({key.scenario, key.condition, method,
                       (fs::path(reference_dir) / (stem + ".csv")).string(),
                       (fs::path(cand_dir) / (stem + ".csv")).string()});
    }
  }

  std::vector<std::future<DtwResult>> futures;
  futures.reserve(pairs.size());
  for (const auto& pair : pairs) {
    futures.push_back(std::async(std::launch::async, [&pair, resample_hz] {
      const Trajectory ref = load_trajectory_file(pair.ref_path);
      const Trajectory cand = load_trajectory_file(pair.cand_path);
      return compare_trajectories(ref, cand, resample_hz);
    }));
  }

  EvaluateResult result;
  json details = json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const DtwResult r = futures[i].get();
    result.entries.push_back(
        {pairs[i].scenario, pairs[i].condition, pairs[i].method, r.normalized});
    json d;
    d["scenario"] = pairs[i].scenario;
    d["condition"] = to_string(pairs[i].condition);
    d["method"] = pairs[i].method;
    d["raw_dtw"] = r.raw;
    d["normalized_dtw"] = r.normalized;
    d["path_length"] = r.path.size();
    details.push_back(std::move(d));
  }
  std::sort(result.entries.begin(), result.entries.end(),
            [](const ReportEntry& a, const ReportEntry& b) {
              if (a.scenario != b.scenario) return a.scenario < b.scenario;
              if (a.condition != b.condition) return a.condition == Condition::MDC;
              return a.method < b.method;
            });
  std::sort(details.begin(), details.end(), [](const json& a, const json& b) {
    if (a["scenario"] != b["scenario"]) return a["scenario"] < b["scenario"];
    if (a["condition"] != b["condition"]) return a["condition"].get<std::string>() == "MDC";
    return a["method"] < b["method"];
  });

  result.report = build_report(result.entries);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file_atomic((fs::path(out_dir) / "report.csv").string(),
                      render_report_csv(result.report));
    write_file_atomic((fs::path(out_dir) / "report.txt").string(),
                      render_report_text(result.report));
    write_file_atomic((fs::path(out_dir) / "results.json").string(), details.dump(2) + "\n");
  }
  return result;
}

}  // namespace virac
