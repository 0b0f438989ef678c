#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "virac/backends.hpp"
#include "virac/environment.hpp"
#include "virac/evaluation.hpp"

namespace virac {

inline constexpr char kVersion[] = "0.1.0";

struct RunConfig {
  BackendConfig backend;
  double tick_hz = 60.0;
  double resample_hz = 30.0;
  double fov_h_deg = 45.0;
  double fov_v_deg = 35.0;
  double max_angular_velocity = 2.5;  // rad/s
  std::size_t memory_capacity = 64;
  std::string out_dir;  // empty: keep everything in memory, write nothing
};

// Cadence: a new decision is made when the current action completes or after
// this long, whichever comes first. An action completes once the head is
// within the tolerance of its target; look_at additionally holds the target
// for the dwell time.
inline constexpr double kDecisionTimeoutS = 1.0;
inline constexpr double kReachedToleranceRad = 2.0 * 3.14159265358979323846 / 180.0;
inline constexpr double kLookAtDwellS = 0.3;

struct RunResult {
  std::string stem;  // "<scenario>_<mdc|apc>", the basename of every output
  Trajectory trajectory;
  std::vector<std::string> action_log_lines;
  std::string memory_json;
  std::string manifest_json;
  std::size_t decision_count = 0;
  int perception_fallbacks = 0;
  int decision_fallbacks = 0;
  int decompose_fallbacks = 0;
  bool truncated = false;  // replay only: the log ended before the run would
};

std::string scenario_stem(const Scenario& scenario);

// Simulates the whole scenario on a fixed tick grid. Writes, when an output
// directory is configured: <stem>.csv, <stem>.actions.jsonl, <stem>.memory.json
// and <stem>.manifest.json. Remote-backend failures fall back to the scripted
// policy for that step and are counted, never silently absorbed.
RunResult run(const Scenario& scenario, const RunConfig& config);

// Re-drives the tick loop from a recorded action log instead of any backend.
// Produces a byte-identical trajectory for an untampered log. A truncated log
// yields the trajectory up to the first missing decision plus a warning on
// stderr; a record naming an object absent from the scenario is an error.
RunResult replay(const Scenario& scenario, const std::string& action_log_path,
                 const RunConfig& config);

struct EvaluateResult {
  std::vector<ReportEntry> entries;  // sorted by scenario, condition, method
  Report report;
};

// Pairs trajectory files by filename stem between the reference directory and
// each candidate directory; "<scenario>_<mdc|apc>.csv" carries the column
// identity and the candidate directory name becomes the method. Pairs are
// compared in parallel. Writes report.csv, report.txt and results.json when
// an output directory is given.
EvaluateResult evaluate_directories(const std::string& reference_dir,
                                    const std::vector<std::string>& candidate_dirs,
                                    double resample_hz, const std::string& out_dir);

}  // namespace virac
