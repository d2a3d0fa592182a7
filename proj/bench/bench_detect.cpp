// Parallel epoch scan vs the serial reference, plus training throughput.
#include <benchmark/benchmark.h>
#include <omp.h>

#include <map>

#include "boscids/detector.hpp"
#include "boscids/synth.hpp"
#include "boscids/trainer.hpp"

using namespace boscids;

namespace {

struct Fixture {
  TrainedModel model;
  std::vector<Slot> slots;
};

// Model from the seed-7 source; test stream of `epochs` default-size epochs
// with a few burst injections so both hit and miss paths run.
const Fixture& fixture(std::size_t epochs) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(epochs);
  if (it != cache.end()) return it->second;
  const Config c;
  const RawTrace clean = gen_normal(make_source(SourceShape{}, 7), 100 * c.epoch_size);
  Fixture f{train(clean, count_table(clean), c), {}};
  InjectionSpec inj;
  for (std::size_t e = 1; e < epochs; e += 7) inj.target_epochs.push_back(e);
  const auto test = gen_anomalous(make_source(SourceShape{}, 8), epochs * c.epoch_size, inj, c);
  f.slots = f.model.index.resolve_trace(test.trace);
  return cache.emplace(epochs, std::move(f)).first->second;
}

void BM_DetectParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(detect_slots(f.model, f.slots));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.slots.size()));
}

void BM_DetectSerial(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(detect_slots_serial(f.model, f.slots));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.slots.size()));
}

void BM_Train(benchmark::State& state) {
  Config c;
  c.train_threshold = 1.0;  // run every epoch
  const RawTrace trace =
      gen_normal(make_source(SourceShape{}, 9), static_cast<std::size_t>(state.range(0)) * c.epoch_size);
  const CountTable counts = count_table(trace);
  for (auto _ : state) benchmark::DoNotOptimize(train(trace, counts, c));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trace.size()));
}

}  // namespace

BENCHMARK(BM_DetectParallel)
    ->ArgsProduct({{16, 64}, {1, 2, 4}})
    ->ArgNames({"epochs", "threads"})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_DetectSerial)->Arg(16)->Arg(64)->ArgName("epochs")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Train)->Arg(100)->Arg(400)->ArgName("epochs")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
