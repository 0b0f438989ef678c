#include <algorithm>
#include <limits>

#include "virac/evaluation.hpp"

namespace virac {

DtwResult dtw(const std::vector<Quaternion>& a, const std::vector<Quaternion>& b) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  if (m == 0 || n == 0) {
    throw InvalidInputError("dtw requires two non-empty sequences");
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Accumulated cost with a one-cell boundary so (1,1) has valid neighbors.
  std::vector<std::vector<double>> acc(m + 1, std::vector<double>(n + 1, kInf));
  acc[0][0] = 0.0;
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const double cost = angular_distance(a[i - 1], b[j - 1]);
      acc[i][j] = cost + std::min({acc[i - 1][j - 1], acc[i - 1][j], acc[i][j - 1]});
    }
  }

  DtwResult result;
  result.raw = acc[m][n];
  result.normalized = result.raw / (static_cast<double>(m + n) / 2.0);

  std::size_t i = m, j = n;
  result.path.push_back({i, j});
  while (i > 1 || j > 1) {
    const double diag = acc[i - 1][j - 1];
    const double up = acc[i - 1][j];
    const double left = acc[i][j - 1];
    const double best = std::min({diag, up, left});
    if (diag == best) {
      --i;
      --j;
    } else if (up == best) {
      --i;
    } else {
      --j;
    }
    result.path.push_back({i, j});
  }
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

DtwResult compare_trajectories(const Trajectory& reference, const Trajectory& candidate,
                               double resample_hz) {
  const Trajectory ref = resample(reference, resample_hz);
  const Trajectory cand = resample(candidate, resample_hz);
  std::vector<Quaternion> a, b;
  a.reserve(ref.size());
  b.reserve(cand.size());
  for (const auto& s : ref.samples) {
    a.push_back(s.orientation);
  }
  for (const auto& s : cand.samples) {
    b.push_back(s.orientation);
  }
  return dtw(a, b);
}

}  // namespace virac
