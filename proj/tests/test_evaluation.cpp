#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <doctest.h>

#include "virac/errors.hpp"
#include "virac/evaluation.hpp"
#include "virac/io.hpp"
#include "virac/orientation.hpp"

using namespace virac;

namespace {

constexpr double kPi = 3.14159265358979323846;

Quaternion random_unit(std::mt19937& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  return normalized(Quaternion{n(gen), n(gen), n(gen), n(gen)});
}

std::vector<Quaternion> random_sequence(std::mt19937& gen, std::size_t len) {
  std::vector<Quaternion> seq;
  seq.reserve(len);
  for (std::size_t i = 0; i < len; ++i) seq.push_back(random_unit(gen));
  return seq;
}

// Independent reference: explicitly walks every monotone lattice path from the
// first cell pair to the last, accumulating per-cell distances, and keeps the
// minimum total. Exponential, so only usable for short sequences.
void enumerate_paths(const std::vector<std::vector<double>>& cost, std::size_t i, std::size_t j,
                     double acc, double& best) {
  acc += cost[i][j];
  const std::size_t m = cost.size();
  const std::size_t n = cost[0].size();
  if (i + 1 == m && j + 1 == n) {
    best = std::min(best, acc);
    return;
  }
  if (i + 1 < m && j + 1 < n) enumerate_paths(cost, i + 1, j + 1, acc, best);
  if (i + 1 < m) enumerate_paths(cost, i + 1, j, acc, best);
  if (j + 1 < n) enumerate_paths(cost, i, j + 1, acc, best);
}

double brute_force_dtw(const std::vector<Quaternion>& a, const std::vector<Quaternion>& b) {
  std::vector<std::vector<double>> cost(a.size(), std::vector<double>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) cost[i][j] = angular_distance(a[i], b[j]);
  double best = std::numeric_limits<double>::infinity();
  enumerate_paths(cost, 0, 0, 0.0, best);
  return best;
}

Trajectory make_trajectory(const std::vector<double>& times, const std::vector<Quaternion>& qs) {
  Trajectory t;
  for (std::size_t i = 0; i < times.size(); ++i) t.samples.push_back({times[i], qs[i]});
  return t;
}

Trajectory parse_csv(const std::string& text) {
  std::istringstream in(text);
  return load_trajectory(in);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

double report_cell(const Report& report, const std::string& method, const std::string& scenario,
                   Condition condition) {
  for (std::size_t r = 0; r < report.methods.size(); ++r) {
    if (report.methods[r] != method) continue;
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
      if (report.columns[c].scenario == scenario && report.columns[c].condition == condition) {
        return report.values[r][c];
      }
    }
  }
  FAIL("cell not found");
  return 0.0;
}

// The published benchmark numbers the renderer goldens are frozen against.
std::vector<ReportEntry> published_entries() {
  return {
      {"bus", Condition::MDC, "track", 0.3815},
      {"bus", Condition::APC, "track", 0.3888},
      {"cafe", Condition::MDC, "track", 0.5840},
      {"cafe", Condition::APC, "track", 0.5519},
      {"crossing", Condition::MDC, "track", 0.6510},
      {"crossing", Condition::APC, "track", 0.7252},
      {"mall", Condition::MDC, "track", 0.6645},
      {"mall", Condition::APC, "track", 0.6342},
      {"street", Condition::MDC, "track", 0.6165},
      {"street", Condition::APC, "track", 0.6698},
      {"bus", Condition::MDC, "virac", 0.3082},
      {"bus", Condition::APC, "virac", 0.5861},
      {"cafe", Condition::MDC, "virac", 0.5681},
      {"cafe", Condition::APC, "virac", 0.4723},
      {"crossing", Condition::MDC, "virac", 0.5478},
      {"crossing", Condition::APC, "virac", 0.6887},
      {"mall", Condition::MDC, "virac", 0.4409},
      {"mall", Condition::APC, "virac", 0.4687},
      {"street", Condition::MDC, "virac", 0.4003},
      {"street", Condition::APC, "virac", 0.3852},
  };
}

std::string fixture_path(const std::string& name) {
  return std::string(VIRAC_FIXTURE_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("trajectory csv round trip preserves values and timestamps") {
  std::mt19937 gen(0x7e57c5f1u);
  Trajectory traj;
  for (int i = 0; i < 50; ++i) traj.samples.push_back({i / 30.0, random_unit(gen)});

  const std::string text = trajectory_csv(traj);
  CHECK(text.rfind("t,qw,qx,qy,qz\n", 0) == 0);

  const Trajectory back = parse_csv(text);
  REQUIRE(back.samples.size() == traj.samples.size());
  for (std::size_t i = 0; i < back.samples.size(); ++i) {
    // t is written at 6 decimals (quantisation <= 5e-7); components at 9
    // decimals cost <= 5e-10 each, plus a ~2e-9 relative scale from the
    // loader's renormalisation.
    CHECK(std::abs(back.samples[i].t - traj.samples[i].t) < 5e-7);
    CHECK(std::abs(back.samples[i].orientation.w - traj.samples[i].orientation.w) < 5e-9);
    CHECK(std::abs(back.samples[i].orientation.x - traj.samples[i].orientation.x) < 5e-9);
    CHECK(std::abs(back.samples[i].orientation.y - traj.samples[i].orientation.y) < 5e-9);
    CHECK(std::abs(back.samples[i].orientation.z - traj.samples[i].orientation.z) < 5e-9);
    CHECK(std::abs(norm(back.samples[i].orientation) - 1.0) < 1e-9);
    CHECK(angular_distance(back.samples[i].orientation, traj.samples[i].orientation) < 1e-7);
  }

  // Serialising the same in-memory trajectory is reproducible byte for byte,
  // and the file writer emits exactly the serialised text.
  CHECK(trajectory_csv(traj) == text);
  const auto path = temp_file("virac_traj_roundtrip.csv");
  save_trajectory_file(path.string(), traj);
  CHECK(read_file(path.string()) == text);
  const Trajectory loaded = load_trajectory_file(path.string());
  CHECK(trajectory_csv(loaded) == trajectory_csv(back));
  std::filesystem::remove(path);
}

TEST_CASE("trajectory loader rejects malformed input") {
  SUBCASE("wrong header") {
    CHECK_THROWS_AS(parse_csv("time,w,x,y,z\n0.0,1,0,0,0\n"), LoadError);
  }
  SUBCASE("wrong field count names the line") {
    try {
      parse_csv("t,qw,qx,qy,qz\n0.000000,1,0,0\n");
      FAIL("expected LoadError");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("non increasing time names the line") {
    const std::string text =
        "t,qw,qx,qy,qz\n"
        "0.000000,1,0,0,0\n"
        "0.100000,1,0,0,0\n"
        "0.100000,1,0,0,0\n";
    try {
      parse_csv(text);
      FAIL("expected LoadError");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
  }
  SUBCASE("trailing junk after the last field") {
    CHECK_THROWS_AS(parse_csv("t,qw,qx,qy,qz\n0.0,1,0,0,0,9\n"), LoadError);
  }
  SUBCASE("non numeric field") {
    CHECK_THROWS_AS(parse_csv("t,qw,qx,qy,qz\n0.0,one,0,0,0\n"), LoadError);
  }
  SUBCASE("empty body") {
    CHECK_THROWS_AS(parse_csv("t,qw,qx,qy,qz\n"), LoadError);
  }
  SUBCASE("missing file reports the path") {
    CHECK_THROWS_AS(load_trajectory_file("/nonexistent/virac.csv"), IoError);
  }
}

TEST_CASE("trajectory loader renormalises small drift and rejects large drift") {
  // Norm 1 + 5e-7 is inside the load tolerance: accepted and renormalised.
  {
    const Trajectory t = parse_csv("t,qw,qx,qy,qz\n0.000000,1.0000005,0,0,0\n");
    REQUIRE(t.samples.size() == 1);
    CHECK(std::abs(norm(t.samples[0].orientation) - 1.0) < 1e-12);
  }
  // Norm drift of 1e-3 is corrupt data, not formatting noise.
  {
    try {
      parse_csv("t,qw,qx,qy,qz\n0.000000,1.001,0,0,0\n");
      FAIL("expected LoadError");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
}

TEST_CASE("resample produces a uniform grid that keeps both endpoints") {
  std::mt19937 gen(0xab5eed01u);
  Trajectory traj;
  const double hz_in = 60.0;
  for (int i = 0; i < 3600; ++i) traj.samples.push_back({i / hz_in, random_unit(gen)});

  const Trajectory out = resample(traj, 30.0);
  // Span 3599/60 s at 30 Hz: 1799 whole intervals land on the grid, giving
  // 1800 grid points, and the final input sample is appended afterwards.
  REQUIRE(out.samples.size() == 1801);
  CHECK(out.samples.front().t == doctest::Approx(0.0));
  CHECK(out.samples.back().t == doctest::Approx(traj.samples.back().t));
  for (std::size_t i = 0; i + 2 < out.samples.size(); ++i) {
    CHECK(out.samples[i + 1].t - out.samples[i].t == doctest::Approx(1.0 / 30.0).epsilon(1e-9));
  }
  for (const auto& s : out.samples) {
    CHECK(std::abs(norm(s.orientation) - 1.0) < 1e-9);
  }
}

TEST_CASE("resample slerps between bracketing samples") {
  const Quaternion a = Quaternion::identity();
  const Quaternion b = from_axis_angle({0.0, 0.0, 1.0}, kPi / 2.0);
  const Trajectory traj = make_trajectory({0.0, 1.0}, {a, b});

  const Trajectory out = resample(traj, 2.0);
  REQUIRE(out.samples.size() == 3);
  // Midpoint of a quarter-turn about z is an eighth-turn about z.
  const Quaternion mid = out.samples[1].orientation;
  CHECK(mid.w == doctest::Approx(0.92387953251128675613).epsilon(1e-12));
  CHECK(mid.z == doctest::Approx(0.38268343236508977173).epsilon(1e-12));
  CHECK(angular_distance(out.samples[2].orientation, b) < 1e-9);
}

TEST_CASE("resample rejects bad inputs") {
  const Trajectory traj =
      make_trajectory({0.0, 1.0}, {Quaternion::identity(), Quaternion::identity()});
  CHECK_THROWS_AS(resample(traj, 0.0), InvalidInputError);
  CHECK_THROWS_AS(resample(traj, -1.0), InvalidInputError);
  const Trajectory empty;
  CHECK_THROWS_AS(resample(empty, 30.0), InvalidInputError);
}

TEST_CASE("dtw on the two by two worked example") {
  const Quaternion id = Quaternion::identity();
  const Quaternion z180 = from_axis_angle({0.0, 0.0, 1.0}, kPi);
  const std::vector<Quaternion> a{id, z180};
  const std::vector<Quaternion> b{id, id};

  const DtwResult r = dtw(a, b);
  CHECK(std::abs(r.raw - kPi) < 1e-12);
  CHECK(std::abs(r.normalized - kPi / 2.0) < 1e-12);
  REQUIRE(r.path.size() == 2);
  CHECK(r.path[0].first == 1);
  CHECK(r.path[0].second == 1);
  CHECK(r.path[1].first == 2);
  CHECK(r.path[1].second == 2);
}

TEST_CASE("dtw matches exhaustive path enumeration on short sequences") {
  std::mt19937 gen(0xd7400001u);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_sequence(gen, len(gen));
    const auto b = random_sequence(gen, len(gen));
    const DtwResult r = dtw(a, b);
    const double expected = brute_force_dtw(a, b);
    CHECK(std::abs(r.raw - expected) < 1e-9);
    CHECK(std::abs(r.normalized - expected / ((a.size() + b.size()) / 2.0)) < 1e-12);
  }
}

TEST_CASE("dtw is symmetric and near zero on identical sequences") {
  std::mt19937 gen(0x51de11u);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_sequence(gen, 8);
    const auto b = random_sequence(gen, 11);
    const DtwResult ab = dtw(a, b);
    const DtwResult ba = dtw(b, a);
    CHECK(std::abs(ab.raw - ba.raw) < 1e-9);
    CHECK(std::abs(ab.normalized - ba.normalized) < 1e-9);
    const DtwResult self = dtw(a, a);
    CHECK(self.raw < 1e-6);
  }
}

TEST_CASE("dtw path is monotone and its cell costs sum to the raw total") {
  std::mt19937 gen(0xa116b3e4u);
  std::uniform_int_distribution<std::size_t> len(2, 20);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = random_sequence(gen, len(gen));
    const auto b = random_sequence(gen, len(gen));
    const DtwResult r = dtw(a, b);

    REQUIRE(!r.path.empty());
    CHECK(r.path.front().first == 1);
    CHECK(r.path.front().second == 1);
    CHECK(r.path.back().first == a.size());
    CHECK(r.path.back().second == b.size());

    double total = 0.0;
    for (std::size_t k = 0; k < r.path.size(); ++k) {
      const auto [i, j] = r.path[k];
      REQUIRE(i >= 1);
      REQUIRE(j >= 1);
      REQUIRE(i <= a.size());
      REQUIRE(j <= b.size());
      total += angular_distance(a[i - 1], b[j - 1]);
      if (k > 0) {
        const std::size_t di = i - r.path[k - 1].first;
        const std::size_t dj = j - r.path[k - 1].second;
        CHECK(di <= 1);
        CHECK(dj <= 1);
        CHECK(di + dj >= 1);
      }
    }
    CHECK(std::abs(total - r.raw) < 1e-9);
  }
}

TEST_CASE("dtw backtrack prefers the diagonal on cost ties") {
  // All-identical sequences tie every move at zero cost; the diagonal
  // preference pins the path shape deterministically.
  const std::vector<Quaternion> a(3, Quaternion::identity());
  const std::vector<Quaternion> b(2, Quaternion::identity());
  const DtwResult r = dtw(a, b);
  REQUIRE(r.path.size() == 3);
  CHECK(r.path[0] == std::make_pair(std::size_t{1}, std::size_t{1}));
  CHECK(r.path[1] == std::make_pair(std::size_t{2}, std::size_t{1}));
  CHECK(r.path[2] == std::make_pair(std::size_t{3}, std::size_t{2}));
}

TEST_CASE("dtw rejects empty sequences") {
  const std::vector<Quaternion> a{Quaternion::identity()};
  const std::vector<Quaternion> empty;
  CHECK_THROWS_AS(dtw(a, empty), InvalidInputError);
  CHECK_THROWS_AS(dtw(empty, a), InvalidInputError);
}

TEST_CASE("compare_trajectories aligns the same motion sampled at different rates") {
  Trajectory fine;
  Trajectory coarse;
  for (int i = 0; i <= 120; ++i) {
    const double t = i / 60.0;
    fine.samples.push_back({t, from_axis_angle({0.0, 0.0, 1.0}, 0.5 * t)});
  }
  for (int i = 0; i <= 40; ++i) {
    const double t = i / 20.0;
    coarse.samples.push_back({t, from_axis_angle({0.0, 0.0, 1.0}, 0.5 * t)});
  }
  const DtwResult r = compare_trajectories(fine, coarse, 30.0);
  CHECK(r.raw < 1e-4);
  CHECK(r.normalized < 1e-6);
}

TEST_CASE("report aggregates repeated cells by mean") {
  const std::vector<ReportEntry> entries{
      {"bus", Condition::MDC, "track", 0.30},
      {"bus", Condition::MDC, "track", 0.50},
      {"bus", Condition::APC, "track", 0.20},
  };
  const Report report = build_report(entries);
  REQUIRE(report.methods.size() == 1);
  REQUIRE(report.columns.size() == 2);
  CHECK(report.columns[0].condition == Condition::MDC);
  CHECK(report.columns[1].condition == Condition::APC);
  CHECK(report_cell(report, "track", "bus", Condition::MDC) ==
        doctest::Approx(0.40).epsilon(1e-12));
  CHECK(report_cell(report, "track", "bus", Condition::APC) ==
        doctest::Approx(0.20).epsilon(1e-12));
}

TEST_CASE("report orders columns by scenario then condition and methods by name") {
  const std::vector<ReportEntry> entries{
      {"street", Condition::APC, "zeta", 0.1},  {"street", Condition::MDC, "zeta", 0.1},
      {"bus", Condition::APC, "zeta", 0.1},     {"bus", Condition::MDC, "zeta", 0.1},
      {"street", Condition::APC, "alpha", 0.2}, {"street", Condition::MDC, "alpha", 0.2},
      {"bus", Condition::APC, "alpha", 0.2},    {"bus", Condition::MDC, "alpha", 0.2},
  };
  const Report report = build_report(entries);
  REQUIRE(report.methods.size() == 2);
  CHECK(report.methods[0] == "alpha");
  CHECK(report.methods[1] == "zeta");
  REQUIRE(report.columns.size() == 4);
  CHECK(report.columns[0].scenario == "bus");
  CHECK(report.columns[0].condition == Condition::MDC);
  CHECK(report.columns[1].scenario == "bus");
  CHECK(report.columns[1].condition == Condition::APC);
  CHECK(report.columns[2].scenario == "street");
  CHECK(report.columns[2].condition == Condition::MDC);
  CHECK(report.columns[3].scenario == "street");
  CHECK(report.columns[3].condition == Condition::APC);
}

TEST_CASE("report refuses a missing cell") {
  const std::vector<ReportEntry> entries{
      {"bus", Condition::MDC, "track", 0.30},
      {"bus", Condition::APC, "track", 0.20},
      {"bus", Condition::MDC, "virac", 0.10},
      // virac bus/APC intentionally absent.
  };
  CHECK_THROWS_AS(build_report(entries), ReportError);
  CHECK_THROWS_AS(build_report({}), ReportError);
}

TEST_CASE("report flags the best method per column at printed precision") {
  const Report report = build_report(published_entries());
  const std::string text = render_report_text(report);

  // The second method wins every column except bus/APC.
  CHECK(text.find("0.3082*") != std::string::npos);
  CHECK(text.find("0.3888*") != std::string::npos);
  CHECK(text.find("0.3815*") == std::string::npos);
  CHECK(text.find("0.5861*") == std::string::npos);
  CHECK(text.find("0.4723*") != std::string::npos);
  CHECK(text.find("0.3852*") != std::string::npos);

  // Ties at the printed precision flag every tied method.
  const std::vector<ReportEntry> tied{
      {"bus", Condition::MDC, "a", 0.12341},
      {"bus", Condition::MDC, "b", 0.12339},
  };
  const std::string tie_text = render_report_text(build_report(tied));
  CHECK(std::count(tie_text.begin(), tie_text.end(), '*') == 2);
}

TEST_CASE("report text layout is stable") {
  const Report report = build_report(published_entries());
  const std::string text = render_report_text(report);

  std::istringstream lines(text);
  std::string header;
  REQUIRE(std::getline(lines, header));
  CHECK(header.rfind("method", 0) == 0);
  CHECK(header.find("bus/MDC") != std::string::npos);
  CHECK(header.find("street/APC") != std::string::npos);
  // Columns appear scenario-major with MDC before APC.
  CHECK(header.find("bus/MDC") < header.find("bus/APC"));
  CHECK(header.find("bus/APC") < header.find("cafe/MDC"));
  CHECK(header.find("mall/APC") < header.find("street/MDC"));

  std::string row;
  std::size_t row_count = 0;
  while (std::getline(lines, row)) {
    ++row_count;
    // No trailing padding on any rendered line.
    CHECK((row.empty() || row.back() != ' '));
  }
  CHECK(row_count == 2);
  CHECK(text.back() == '\n');
}

TEST_CASE("report csv is long format with fixed ordering") {
  const Report report = build_report(published_entries());
  const std::string csv = render_report_csv(report);

  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "scenario,condition,method,normalized_dtw");
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 20);
  CHECK(rows[0] == "bus,MDC,track,0.3815");
  CHECK(rows[1] == "bus,MDC,virac,0.3082");
  CHECK(rows[2] == "bus,APC,track,0.3888");
  CHECK(rows[3] == "bus,APC,virac,0.5861");
  CHECK(rows[4] == "cafe,MDC,track,0.5840");
  CHECK(rows[19] == "street,APC,virac,0.3852");
}

TEST_CASE("report renderers reproduce the frozen goldens") {
  const Report report = build_report(published_entries());
  CHECK(render_report_text(report) == read_file(fixture_path("report_golden.txt")));
  CHECK(render_report_csv(report) == read_file(fixture_path("report_golden.csv")));
}
