#include <benchmark/benchmark.h>

#include "sgwr/model.hpp"
#include "sgwr/snapshot.hpp"
#include "sgwr/synth.hpp"

namespace {

std::vector<sgwr::SampleVector> squat(std::size_t frames) {
  return sgwr::flatten(sgwr::generate_exercise(sgwr::make_avatar(1), sgwr::ExerciseVariant::Correct, frames).sequence);
}

sgwr::Model trained(sgwr::ModelVariant v, std::size_t frames, int epochs) {
  auto cfg = sgwr::default_config(v);
  cfg.epochs = epochs;
  return sgwr::train_model(v, squat(frames), cfg).model;
}

}  // namespace

static void BM_FindBmus(benchmark::State& state) {
  const auto model = trained(sgwr::ModelVariant::Gamma, 100, static_cast<int>(state.range(0)));
  const auto samples = squat(100);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.network.find_bmus(samples[i++ % samples.size()]));
  }
  state.counters["nodes"] = static_cast<double>(model.network.size());
}
BENCHMARK(BM_FindBmus)->Arg(1)->Arg(3)->Arg(10);

static void BM_TrainSubnode(benchmark::State& state) {
  const auto samples = squat(static_cast<std::size_t>(state.range(0)));
  const auto cfg = sgwr::default_config(sgwr::ModelVariant::Subnode);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sgwr::train_model(sgwr::ModelVariant::Subnode, samples, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * cfg.epochs);
}
BENCHMARK(BM_TrainSubnode)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_GammaPredict(benchmark::State& state) {
  const auto model = trained(sgwr::ModelVariant::Gamma, 100, 3);
  const auto start = model.network.nodes().begin()->first;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sgwr::gamma_predict(model.network, start, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_GammaPredict)->Arg(5)->Arg(100);

static void BM_ExpectedPosesSubnode(benchmark::State& state) {
  const auto model = trained(sgwr::ModelVariant::Subnode, 100, 3);
  const auto samples = squat(100);
  for (auto _ : state) benchmark::DoNotOptimize(sgwr::expected_poses(model, samples));
}
BENCHMARK(BM_ExpectedPosesSubnode);

static void BM_SnapshotRoundTrip(benchmark::State& state) {
  const auto model = trained(sgwr::ModelVariant::Subnode, 100, 3);
  for (auto _ : state) benchmark::DoNotOptimize(sgwr::load_snapshot(sgwr::save_snapshot(model)));
}
BENCHMARK(BM_SnapshotRoundTrip)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
