#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "virac/environment.hpp"
#include "virac/errors.hpp"
#include "virac/orientation.hpp"

namespace virac {

struct TrajectorySample {
  double t = 0.0;
  Quaternion orientation;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
};

// CSV with header "t,qw,qx,qy,qz"; t at 6 decimals, components at 9.
// Written bytes are locale-independent, so identical trajectories produce
// identical files.
std::string trajectory_csv(const Trajectory& trajectory);
void save_trajectory_file(const std::string& path, const Trajectory& trajectory);

// Strict reader: exact header, strictly increasing t, finite fields. Rows
// whose quaternion norm drifts within 1e-6 of unit are renormalized; larger
// deviations raise LoadError naming the line.
Trajectory load_trajectory(std::istream& source);
Trajectory load_trajectory_file(const std::string& path);

// Resamples onto the uniform grid t0 + k/rate. The final sample time is
// appended when the grid does not land on it. Orientation between samples is
// interpolated along the shorter arc.
Trajectory resample(const Trajectory& trajectory, double rate_hz);

struct DtwResult {
  double raw = 0.0;
  double normalized = 0.0;  // raw / ((len_a + len_b) / 2)
  std::vector<std::pair<std::size_t, std::size_t>> path;  // 1-based index pairs
};

// Dynamic time warping under the rotation-angle metric. The path starts at
// (1,1), ends at (len_a,len_b), and moves by diagonal, down, or right steps;
// cost ties during backtracking resolve diagonal first, then (i-1,j), then
// (i,j-1).
DtwResult dtw(const std::vector<Quaternion>& a, const std::vector<Quaternion>& b);

DtwResult compare_trajectories(const Trajectory& reference, const Trajectory& candidate,
                               double resample_hz);

struct ReportEntry {
  std::string scenario;
  Condition condition = Condition::MDC;
  std::string method;
  double normalized_dtw = 0.0;
};

struct ReportColumn {
  std::string scenario;
  Condition condition = Condition::MDC;
};

// Methods by row (sorted), scenario/condition by column (scenario sorted,
// MDC before APC). Cells hold the mean normalized distance; `best` marks the
// per-column minima, every tied method included.
struct Report {
  std::vector<std::string> methods;
  std::vector<ReportColumn> columns;
  std::vector<std::vector<double>> values;
  std::vector<std::vector<bool>> best;
};

// Throws ReportError when a method has no value for some column.
Report build_report(const std::vector<ReportEntry>& entries);

std::string render_report_text(const Report& report);
std::string render_report_csv(const Report& report);

}  // namespace virac
