#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "tractrix/charts.hpp"
#include "tractrix/kernels.hpp"
#include "tractrix/scenario.hpp"

using namespace tractrix;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::Parallel : Exec::Serial; }

void label(benchmark::State& st) { st.SetLabel(st.range(0) ? "parallel" : "serial"); }

struct Annotated {
  ScenarioConfig cfg;
  ManifoldModel model;
  TractorCurve tractor;
  TractrixTrace trace;
};

const Annotated& hilly_trace() {
  static const Annotated a = [] {
    Annotated x;
    x.cfg = load_config(std::string(TRACTRIX_SCENARIOS) + "/hilly.json");
    x.model = build_model(x.cfg.model);
    x.tractor = build_tractor(x.cfg, x.model);
    x.trace = simulate_scenario(x.cfg);
    return x;
  }();
  return a;
}

void BM_annotate_records(benchmark::State& st) {
  const Annotated& a = hilly_trace();
  for (auto _ : st) {
    TractrixTrace tr = a.trace;
    annotate_records(a.tractor, tr, a.cfg.sim.pole_step, a.cfg.sim.cusp_speed_eps, exec_of(st));
    benchmark::DoNotOptimize(tr.records.back().kappa);
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(a.trace.records.size()));
  label(st);
}

void BM_curvature_range(benchmark::State& st) {
  const auto hilly = make_catalog_surface("hilly", {{"A", 0.5}, {"omega", 1.0}});
  const Rect r{-5, 5, -5, 5};
  for (auto _ : st) benchmark::DoNotOptimize(sample_curvature_range(hilly, r, 400, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * 400 * 400);
  label(st);
}

void BM_spaceform_table(benchmark::State& st) {
  const auto sol = solve_from_d0(-1.0, 1.0, 0.5);
  std::vector<double> s;
  for (int i = 0; i < 100000; ++i) s.push_back(1e-4 * i);
  for (auto _ : st) benchmark::DoNotOptimize(spaceform_table(sol, s, exec_of(st)));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(s.size()));
  label(st);
}

}  // namespace

BENCHMARK(BM_annotate_records)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_curvature_range)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_spaceform_table)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
