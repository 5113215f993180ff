#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "lutzlab/distance.hpp"
#include "lutzlab/family.hpp"
#include "lutzlab/persistence.hpp"
#include "lutzlab/profile.hpp"

namespace {

using namespace lutzlab;

TwistParams reference_params() {
  TwistParams p;
  p.delta0 = p.epsilon0 / 100.0;
  return with_solved_continuity(p);
}

void BM_Mollify(benchmark::State& state) {
  const TwistParams p = reference_params();
  const ProfilePair raw = build_paper_path(p);
  SmoothingWindow w = SmoothingWindow::standard(p.epsilon0, p.delta0);
  w.samples = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(mollify(raw, w));
}
BENCHMARK(BM_Mollify)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_ContactCheck(benchmark::State& state) {
  const TwistParams p = reference_params();
  const ProfilePair pair = mollify(build_paper_path(p), SmoothingWindow::standard(p.epsilon0, p.delta0));
  for (auto _ : state) benchmark::DoNotOptimize(check_contact_condition(pair, 10000));
}
BENCHMARK(BM_ContactCheck)->Unit(benchmark::kMillisecond);

void BM_GraySup(benchmark::State& state) {
  const FamilyModel model;
  GrayPathSpec g;
  g.family = model.family_ptr();
  g.u_start = 0.04;
  g.u_end = 0.06;
  g.r_grid = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gray_sup(g, 0.05));
}
BENCHMARK(BM_GraySup)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_TriangleUb(benchmark::State& state) {
  const FamilyModel model;
  const FormSpec s1 = model.embed_point(0.0, std::log(0.04));
  const FormSpec s2 = model.embed_point(std::log(2.0), std::log(0.06));
  for (auto _ : state) benchmark::DoNotOptimize(triangle_ub(model, s1, s2));
}
BENCHMARK(BM_TriangleUb)->Unit(benchmark::kMillisecond);

void BM_Barcode(benchmark::State& state) {
  std::mt19937_64 rng(7);
  const FilteredDGA dga = random_admissible_dga(rng, static_cast<int>(state.range(0)), 6, 16, 5);
  for (auto _ : state) benchmark::DoNotOptimize(barcode(dga));
}
BENCHMARK(BM_Barcode)->Arg(3)->Arg(5)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
