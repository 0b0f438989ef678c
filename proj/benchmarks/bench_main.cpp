#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "virac/environment.hpp"
#include "virac/evaluation.hpp"
#include "virac/orientation.hpp"

namespace {

using namespace virac;

std::vector<Quaternion> random_quaternions(std::size_t n, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Quaternion> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Quaternion q{gauss(gen), gauss(gen), gauss(gen), gauss(gen)};
    out.push_back(normalized(q));
  }
  return out;
}

void BM_angular_distance(benchmark::State& state) {
  const auto quats = random_quaternions(1024, 42);
  std::size_t i = 0;
  for (auto _ : state) {
    const double d = angular_distance(quats[i % 1024], quats[(i + 1) % 1024]);
    benchmark::DoNotOptimize(d);
    ++i;
  }
}
BENCHMARK(BM_angular_distance);

void BM_slerp_step(benchmark::State& state) {
  const auto quats = random_quaternions(1024, 43);
  std::size_t i = 0;
  for (auto _ : state) {
    const Quaternion q = slerp_step(quats[i % 1024], quats[(i + 1) % 1024], 0.04);
    benchmark::DoNotOptimize(q);
    ++i;
  }
}
BENCHMARK(BM_slerp_step);

void BM_dtw(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_quaternions(n, 44);
  const auto b = random_quaternions(n, 45);
  for (auto _ : state) {
    const DtwResult r = dtw(a, b);
    benchmark::DoNotOptimize(r.normalized);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_dtw)->Arg(64)->Arg(256)->Arg(1024)->Complexity(benchmark::oNSquared);

Scenario bench_scenario() {
  Scenario s;
  s.name = "bench";
  s.environment_kind = "street";
  s.condition = Condition::MDC;
  s.goal = "walk";
  s.duration_s = 60.0;
  s.body_trajectory = {{0.0, {0, 0, 1.6}, 0.0}, {60.0, {0, 60, 1.6}, 0.0}};
  std::mt19937 gen(46);
  std::uniform_real_distribution<double> pos(-20.0, 20.0);
  for (int i = 0; i < 32; ++i) {
    SceneObject o;
    o.id = "obj-" + std::to_string(i);
    o.label = o.id;
    o.center = {pos(gen), pos(gen) + 30.0, 1.0};
    o.radius = 0.5;
    o.salience = 0.5;
    s.objects.push_back(o);
  }
  return s;
}

void BM_visible_objects(benchmark::State& state) {
  const Scenario s = bench_scenario();
  const Quaternion head = heading_quaternion(0.0);
  double t = 0.0;
  for (auto _ : state) {
    const auto vis = visible_objects(s, t, head, FieldOfView{});
    benchmark::DoNotOptimize(vis.size());
    t += 1.0 / 60.0;
    if (t > 59.0) {
      t = 0.0;
    }
  }
}
BENCHMARK(BM_visible_objects);

}  // namespace

BENCHMARK_MAIN();
