// Microbenchmarks for the hot paths of the experiment runners: FIM assembly
// over the full sample set, the robust merged-basis PEB, and profile
// construction. Run with --benchmark_filter=... to narrow.

#include <benchmark/benchmark.h>

#include "risloc/experiment.hpp"
#include "risloc/fisher.hpp"
#include "risloc/ris_profile.hpp"

namespace {

using namespace risloc;

struct BenchScene {
  ScenarioSpec spec;
  ScenarioGeometry geometry;
  RisProfile profile;

  explicit BenchScene(Scale scale)
      : spec(default_config(scale).scenario),
        geometry(spec.build_geometry()),
        profile(random_profile(geometry.n_ris(), spec.signal.n_slots, 7)) {}
};

const BenchScene& desk_scene() {
  static const BenchScene scene(Scale::Desk);
  return scene;
}

const BenchScene& paper_scene() {
  static const BenchScene scene(Scale::Paper);
  return scene;
}

void bm_fim_position_desk(benchmark::State& state) {
  const BenchScene& s = desk_scene();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fim(Parameterization::Position, s.geometry,
                                 s.spec.signal, s.spec.flags, s.profile,
                                 SampleMask::all(), threads));
  }
}
BENCHMARK(bm_fim_position_desk)->Arg(1)->Arg(4);

void bm_fim_position_paper(benchmark::State& state) {
  const BenchScene& s = paper_scene();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fim(Parameterization::Position, s.geometry,
                                 s.spec.signal, s.spec.flags, s.profile,
                                 SampleMask::all(), threads));
  }
}
BENCHMARK(bm_fim_position_paper)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void bm_merged_peb_desk(benchmark::State& state) {
  const BenchScene& s = desk_scene();
  for (auto _ : state) {
    benchmark::DoNotOptimize(position_peb_merged(
        s.geometry, s.spec.signal, s.spec.flags, s.profile));
  }
}
BENCHMARK(bm_merged_peb_desk);

void bm_intermediate_efi_desk(benchmark::State& state) {
  const BenchScene& s = desk_scene();
  for (auto _ : state) {
    benchmark::DoNotOptimize(intermediate_efi(s.geometry, s.spec.signal,
                                              s.spec.flags, s.profile));
  }
}
BENCHMARK(bm_intermediate_efi_desk);

void bm_random_profile_desk(benchmark::State& state) {
  const BenchScene& s = desk_scene();
  uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        random_profile(s.geometry.n_ris(), s.spec.signal.n_slots, seed++));
  }
}
BENCHMARK(bm_random_profile_desk);

void bm_focusing_profile_desk(benchmark::State& state) {
  const BenchScene& s = desk_scene();
  for (auto _ : state) {
    benchmark::DoNotOptimize(focusing_profile(
        s.geometry, s.spec.ue_position, 0, s.spec.signal.n_subcarriers / 2,
        s.spec.signal));
  }
}
BENCHMARK(bm_focusing_profile_desk);

void bm_sym_inverse_5x5(benchmark::State& state) {
  const BenchScene& s = desk_scene();
  const MatrixD j = fim(Parameterization::Intermediate, s.geometry,
                        s.spec.signal, s.spec.flags, s.profile);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sym_inverse(j));
  }
}
BENCHMARK(bm_sym_inverse_5x5);

}  // namespace

BENCHMARK_MAIN();
