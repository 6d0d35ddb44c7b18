#include "fcsim/astar.hpp"
#include "fcsim/field_suite.hpp"
#include "fcsim/pencil.hpp"
#include "fcsim/solver.hpp"
#include "fcsim/tomega.hpp"

#include <benchmark/benchmark.h>

#include <string>

using namespace fcsim;

namespace {

std::string data(const std::string& name) { return std::string(FCSIM_DATA_DIR) + "/" + name; }

CoupledDaeSystem coil_system(const std::string& netlist_file) {
  const auto doc = netlist::load_netlist(data(netlist_file));
  return assemble(doc, field::bind_field_elements(doc, FCSIM_DATA_DIR));
}

void bm_implicit_euler_step(benchmark::State& state) {
  const CoupledDaeSystem sys = coil_system("coil_vdriven.cir");
  ImplicitEuler stepper(sys);
  Vec x = Vec::Zero(sys.size());
  double t = 0.0;
  for (auto _ : state) {
    t += 1e-5;
    x = stepper.step(x, t, 1e-5);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(bm_implicit_euler_step);

void bm_nonlinear_step(benchmark::State& state) {
  const auto doc = netlist::parse_netlist("I1 0 1 DC 50\nR1 1 0 100\nX1 1 0 field=coil_nonlinear.fs\n.ground 0");
  const CoupledDaeSystem sys = assemble(doc, field::bind_field_elements(doc, FCSIM_DATA_DIR));
  for (auto _ : state) {
    ImplicitEuler stepper(sys, 1e-12, 40);
    benchmark::DoNotOptimize(stepper.step(Vec::Zero(sys.size()), 1e-2, 1e-2));
  }
}
BENCHMARK(bm_nonlinear_step)->Unit(benchmark::kMillisecond);

void bm_inductance(benchmark::State& state, field::Formulation f) {
  field::FieldSpec spec = field::load_field_spec(data("refine_base.fs"));
  spec = field::refine(spec, static_cast<int>(state.range(0)));
  spec.formulation = f;
  const field::FitModel model = field::FitModel::build(spec);
  for (auto _ : state) {
    if (f == field::Formulation::TOmega)
      benchmark::DoNotOptimize(field::l_lambda_tomega(field::TOmegaElement(model)).L(0, 0));
    else
      benchmark::DoNotOptimize(field::l_lambda_astar(field::AStarElement(model)).L(0, 0));
  }
}
BENCHMARK_CAPTURE(bm_inductance, tomega, field::Formulation::TOmega)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(bm_inductance, astar, field::Formulation::AStar)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void bm_pencil_index(benchmark::State& state) {
  const CoupledDaeSystem sys = coil_system("coil_idriven.cir");
  const auto [e, a] = linearize(sys, Vec::Zero(sys.size()), 0.0);
  const Mat ed(e), ad(a);
  for (auto _ : state) benchmark::DoNotOptimize(pencil_index(ed, ad));
}
BENCHMARK(bm_pencil_index)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
