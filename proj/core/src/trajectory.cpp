#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>

#include "virac/evaluation.hpp"
#include "virac/io.hpp"

namespace virac {

namespace {

constexpr char kHeader[] = "t,qw,qx,qy,qz";

std::string strip_cr(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
    line.pop_back();
  }
  return line;
}

}  // namespace

std::string trajectory_csv(const Trajectory& trajectory) {
  std::string out(kHeader);
  out += '\n';
  char buf[160];
  for (const auto& s : trajectory.samples) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.9f,%.9f,%.9f,%.9f\n", s.t, s.orientation.w,
                  s.orientation.x, s.orientation.y, s.orientation.z);
    out += buf;
  }
  return out;
}

void save_trajectory_file(const std::string& path, const Trajectory& trajectory) {
  write_file_atomic(path, trajectory_csv(trajectory));
}

Trajectory load_trajectory(std::istream& source) {
  std::string line;
  if (!std::getline(source, line) || strip_cr(line) != kHeader) {
    throw LoadError("line 1: expected header \"" + std::string(kHeader) + "\"");
  }
  Trajectory traj;
  std::size_t line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) {
      continue;
    }
    TrajectorySample s;
    char trailing;
    const int got = std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf%c", &s.t, &s.orientation.w,
                                &s.orientation.x, &s.orientation.y, &s.orientation.z,
                                &trailing);
    if (got != 5) {
      throw LoadError("line " + std::to_string(line_no) + ": expected 5 comma-separated values");
    }
    if (!std::isfinite(s.t) || !is_finite(s.orientation)) {
      throw LoadError("line " + std::to_string(line_no) + ": non-finite value");
    }
    if (!traj.samples.empty() && s.t <= traj.samples.back().t) {
      throw LoadError("line " + std::to_string(line_no) + ": timestamps must strictly increase");
    }
    const double n = norm(s.orientation);
    if (std::abs(n - 1.0) > 1e-6) {
      throw LoadError("line " + std::to_string(line_no) + ": quaternion norm " +
                      std::to_string(n) + " outside the 1e-6 unit tolerance");
    }
    s.orientation = normalized(s.orientation);
    traj.samples.push_back(s);
  }
  if (traj.samples.empty()) {
    throw LoadError("trajectory has no samples");
  }
  return traj;
}

Trajectory load_trajectory_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open trajectory file: " + path);
  }
  try {
    return load_trajectory(in);
  } catch (const LoadError& ex) {
    throw LoadError(path + ": " + ex.what());
  }
}

Trajectory resample(const Trajectory& trajectory, double rate_hz) {
  if (!(rate_hz > 0.0)) {
    throw InvalidInputError("resample rate must be > 0");
  }
  if (trajectory.empty()) {
    throw InvalidInputError("cannot resample an empty trajectory");
  }
  const auto& samples = trajectory.samples;
  const double t0 = samples.front().t;
  const double t_end = samples.back().t;

  std::vector<double> grid;
  const auto intervals =
      static_cast<std::size_t>(std::floor((t_end - t0) * rate_hz + 1e-9));
  grid.reserve(intervals + 2);
  for (std::size_t k = 0; k <= intervals; ++k) {
    grid.push_back(t0 + static_cast<double>(k) / rate_hz);
  }
  if (grid.back() < t_end - 1e-9) {
    grid.push_back(t_end);
  }

  Trajectory out;
  out.samples.reserve(grid.size());
  std::size_t hi = 1;
  for (double t : grid) {
    TrajectorySample s;
    s.t = t;
    if (t <= samples.front().t) {
      s.orientation = samples.front().orientation;
    } else if (t >= samples.back().t) {
      s.orientation = samples.back().orientation;
    } else {
      while (hi < samples.size() && samples[hi].t < t) {
        ++hi;
      }
      const TrajectorySample& a = samples[hi - 1];
      const TrajectorySample& b = samples[hi];
      const double u = (t - a.t) / (b.t - a.t);
      s.orientation = slerp(a.orientation, b.orientation, u);
    }
    out.samples.push_back(s);
  }
  return out;
}

}  // namespace virac
