// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "wgqed/kernels.hpp"
#include "wgqed/model.hpp"
#include "wgqed/oracle.hpp"

namespace {

using namespace wgqed;

std::vector<cplx> random_tensor(Index n) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& c : v) c = {g(rng), g(rng)};
  return v;
}

template <bool Parallel>
void BM_GateKernel(benchmark::State& state) {
  const int qubits = static_cast<int>(state.range(0));
  const auto bond = static_cast<Index>(state.range(1));
  const auto gate = build_step_gate(PhysicalParams::symmetric(qubits, 0.5, 0.0)).gate;
  const auto in = random_tensor(bond * gate.dimension() * bond);
  std::vector<cplx> out(in.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      apply_blocked_gate_parallel(gate, in, out, bond, bond);
    } else {
      apply_blocked_gate_serial(gate, in, out, bond, bond);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(in.size()));
}

template <bool Parallel>
void BM_SectorStep(benchmark::State& state) {
  const auto params = PhysicalParams::symmetric(2, 0.5, 0.0);
  const auto gate = build_step_gate(params);
  SectorSimulation sim(params, product_state("ee"));
  for (long k = 0; k < state.range(0); ++k) sim.step();
  for (auto _ : state) {
    auto next = Parallel ? sector_step_parallel(sim.state(), gate)
                         : sector_step_serial(sim.state(), gate);
    benchmark::DoNotOptimize(next.amplitudes.data());
  }
  state.counters["basis"] = static_cast<double>(sim.state().basis.size());
}

BENCHMARK(BM_GateKernel<false>)->Name("gate/serial")->Args({2, 16})->Args({2, 64})->Args({4, 32});
BENCHMARK(BM_GateKernel<true>)->Name("gate/parallel")->Args({2, 16})->Args({2, 64})->Args({4, 32});
BENCHMARK(BM_SectorStep<false>)->Name("sector/serial")->Arg(50)->Arg(200);
BENCHMARK(BM_SectorStep<true>)->Name("sector/parallel")->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
