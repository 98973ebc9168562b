#include <benchmark/benchmark.h>

#include "popsim/engine.hpp"
#include "popsim/masked_remainder.hpp"
#include "popsim/plain_remainder.hpp"
#include "popsim/rng.hpp"
#include "popsim/secure_transfer.hpp"

namespace {

using namespace popsim;

void BM_SelectPair(benchmark::State& state) {
  Rng rng = derive_stream(1, "scheduler");
  std::uint32_t n = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_pair(n, rng));
  }
}
BENCHMARK(BM_SelectPair)->Arg(16)->Arg(64);

void BM_PlainStep(benchmark::State& state) {
  std::uint32_t n = static_cast<std::uint32_t>(state.range(0));
  std::vector<int> inputs(n);
  Rng rng = derive_stream(7, "experiment-inputs");
  for (auto& v : inputs) v = rng.zk(5);
  Population<PlainRemainder> pop(PlainRemainder(5, 2), inputs, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pop.step());
  }
}
BENCHMARK(BM_PlainStep)->Arg(16)->Arg(64);

void BM_MaskedStep(benchmark::State& state) {
  std::uint32_t n = static_cast<std::uint32_t>(state.range(0));
  std::vector<MaskedRemainder::Input> inputs(n);
  Rng rng = derive_stream(7, "experiment-inputs");
  for (std::uint32_t a = 0; a < n; ++a) inputs[a] = {rng.zk(5), a == 0};
  Population<MaskedRemainder> pop(MaskedRemainder(5), inputs, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pop.step());
  }
}
BENCHMARK(BM_MaskedStep)->Arg(16)->Arg(64);

void BM_MaskedRunToConvergence(benchmark::State& state) {
  std::uint32_t n = static_cast<std::uint32_t>(state.range(0));
  std::uint64_t seed = 11;
  for (auto _ : state) {
    std::vector<MaskedRemainder::Input> inputs(n);
    Rng rng = derive_stream(seed, "experiment-inputs");
    for (std::uint32_t a = 0; a < n; ++a) inputs[a] = {rng.zk(3), a == 0};
    RunOptions opt;
    opt.check_interval = n;
    Population<MaskedRemainder> pop(MaskedRemainder(3), inputs, seed++, opt);
    auto status = pop.run(1u << 22, [](const Population<MaskedRemainder>& p) {
      for (const auto& s : p.config())
        if (is_bot(s.msg.out)) return false;
      return true;
    });
    benchmark::DoNotOptimize(status);
  }
}
BENCHMARK(BM_MaskedRunToConvergence)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_TransferRun(benchmark::State& state) {
  std::uint32_t n = 16;
  std::uint64_t seed = 3;
  for (auto _ : state) {
    std::vector<SecureTransfer::Input> inputs(n);
    inputs[0] = {1, Label::Sender};
    for (std::uint32_t a = 1; a < n; ++a) inputs[a] = {kBot, Label::Unvisited};
    Population<SecureTransfer> pop(SecureTransfer(4), inputs, seed++);
    auto status = pop.run(200ull * n * n, [](const Population<SecureTransfer>& p) {
      return p.config()[0].msg.label == Label::Visited;
    });
    benchmark::DoNotOptimize(status);
  }
}
BENCHMARK(BM_TransferRun)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
