// Microbenchmarks for the hot paths: transforms, projections, products, the
// solver step and jet assembly.

#include <benchmark/benchmark.h>

#include "lnse/field.hpp"
#include "lnse/jets.hpp"
#include "lnse/lambda_nse.hpp"
#include "lnse/operators.hpp"
#include "lnse/rng.hpp"

using namespace lnse;

namespace {

SpectralField random_vec(int n, int band, uint64_t seed) {
  SpectralField f({n, n, n}, 3);
  for (int c = 0; c < 3; ++c)
    f.for_each_mode(c, [&](int k0, int k1, int k2, cplx& v) {
      if (std::abs(k0) > band || std::abs(k1) > band || std::abs(k2) > band) return;
      double g0, g1;
      normal_pair(seed, uint64_t(c), uint64_t(k0 + 128), uint64_t(k1 + 128),
                  uint64_t(k2 + 128), g0, g1);
      v = cplx(g0, g1);
    });
  f.zero_nyquist();
  f.enforce_hermitian();
  return f;
}

void bm_fft_roundtrip(benchmark::State& state) {
  int n = int(state.range(0));
  SpectralField f = random_vec(n, n / 2 - 1, 1);
  for (auto _ : state) {
    PhysicalField p = to_physical(f);
    SpectralField g = from_physical(p, f.dims());
    benchmark::DoNotOptimize(g.data().data());
  }
  state.SetItemsProcessed(state.iterations() * f.dims().size() * 3);
}
BENCHMARK(bm_fft_roundtrip)->Arg(32)->Arg(64);

void bm_leray(benchmark::State& state) {
  int n = int(state.range(0));
  SpectralField f = random_vec(n, n / 2 - 1, 2);
  for (auto _ : state) {
    SpectralField g = leray_project(f);
    benchmark::DoNotOptimize(g.data().data());
  }
}
BENCHMARK(bm_leray)->Arg(32)->Arg(64);

void bm_outer_product(benchmark::State& state) {
  int n = int(state.range(0));
  SpectralField u = random_vec(n, n / 2 - 1, 3);
  for (auto _ : state) {
    SpectralField t = outer_product(u, u);
    benchmark::DoNotOptimize(t.data().data());
  }
}
BENCHMARK(bm_outer_product)->Arg(16)->Arg(32);

void bm_inverse_divergence(benchmark::State& state) {
  int n = int(state.range(0));
  SpectralField v = project_nonzero(random_vec(n, n / 2 - 1, 4));
  for (auto _ : state) {
    SpectralField r = inverse_divergence(v);
    benchmark::DoNotOptimize(r.data().data());
  }
}
BENCHMARK(bm_inverse_divergence)->Arg(32)->Arg(64);

void bm_solver_step(benchmark::State& state) {
  int n = int(state.range(0));
  SolverConfig cfg;
  cfg.nu = 0.05;
  cfg.t_end = 2e-3;
  cfg.dt = 1e-3;
  cfg.schedule.cap = 8.0;
  cfg.geometric_levels = 0;
  SpectralField v0 = taylor_green(n);
  for (auto _ : state) {
    SolverRun run = solve(v0, cfg);
    benchmark::DoNotOptimize(run.energy.data());
  }
  state.SetItemsProcessed(state.iterations() * 2);  // steps per iteration
}
BENCHMARK(bm_solver_step)->Arg(32)->Arg(64);

void bm_jet_assembly(benchmark::State& state) {
  JetParams p = JetParams::desk(32.0, 1);
  p.shifts = choose_shifts(p);
  JetTerms jt = jet_terms(0, p, 2, 1);
  int need = required_grid(jt, p);
  Dims d{need + (need % 4 ? 2 : 0), need + (need % 4 ? 2 : 0), need + (need % 4 ? 2 : 0)};
  for (auto _ : state) {
    SpectralField w = jet_field(jt, p, JetField::w, d, 0.3);
    benchmark::DoNotOptimize(w.data().data());
  }
}
BENCHMARK(bm_jet_assembly);

void bm_mollify(benchmark::State& state) {
  int n = int(state.range(0));
  SpectralField f = random_vec(n, n / 2 - 1, 5);
  for (auto _ : state) {
    SpectralField m = mollify_space(f, 0.05);
    benchmark::DoNotOptimize(m.data().data());
  }
}
BENCHMARK(bm_mollify)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
