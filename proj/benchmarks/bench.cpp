#include <benchmark/benchmark.h>

#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "empa/assembler.hpp"
#include "empa/diagram.hpp"
#include "empa/engine.hpp"

namespace {

std::string source(const std::string& name) {
  std::ifstream f(std::string(EMPA_FIXTURE_DIR) + "/" + name);
  return {std::istreambuf_iterator<char>(f), {}};
}

void BM_Assemble(benchmark::State& state) {
  const std::string src = source("QasumC_4.eyo");
  for (auto _ : state) benchmark::DoNotOptimize(empa::assemble(src));
}
BENCHMARK(BM_Assemble);

void BM_Decode(benchmark::State& state) {
  std::mt19937 rng(3);
  std::vector<std::uint8_t> mem;
  while (mem.size() < 4000) {
    const auto e = empa::encode({empa::op::irmovl, empa::Reg::none, static_cast<empa::Reg>(rng() % 8), static_cast<std::uint32_t>(rng())});
    mem.insert(mem.end(), e.begin(), e.end());
  }
  for (auto _ : state) {
    std::uint32_t off = 0;
    while (off + 6 <= mem.size()) off += empa::decode(mem, off).length;
    benchmark::DoNotOptimize(off);
  }
}
BENCHMARK(BM_Decode);

void BM_Run(benchmark::State& state, const char* name) {
  const auto image = empa::assemble(source(name));
  empa::MachineConfig cfg;
  cfg.cores = static_cast<std::uint32_t>(state.range(0));
  cfg.check_invariants = false;
  std::uint64_t cycles = 0;
  for (auto _ : state) {
    auto r = empa::run_to_halt(image, cfg);
    cycles += r.machine.clock();
  }
  state.counters["cycles/s"] = benchmark::Counter(static_cast<double>(cycles), benchmark::Counter::kIsRate);
}
BENCHMARK_CAPTURE(BM_Run, sumup, "Qasum5_4.eyo")->Arg(5);
BENCHMARK_CAPTURE(BM_Run, adaptive, "QasumC_4.eyo")->Arg(1)->Arg(4)->Arg(8);
BENCHMARK_CAPTURE(BM_Run, dynpar, "DynPar.eyo")->Arg(8);

void BM_Diagram(benchmark::State& state) {
  empa::MachineConfig cfg;
  cfg.cores = 8;
  const auto r = empa::run_to_halt(empa::assemble(source("DynPar.eyo")), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(empa::render_diagram(r.trace, cfg));
}
BENCHMARK(BM_Diagram);

}  // namespace

BENCHMARK_MAIN();
