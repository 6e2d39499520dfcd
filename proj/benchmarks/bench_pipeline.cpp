#include <benchmark/benchmark.h>

#include "uwisac/chanest.hpp"
#include "uwisac/channel.hpp"
#include "uwisac/crb.hpp"
#include "uwisac/ddest.hpp"
#include "uwisac/outlier.hpp"

using namespace uwisac;

namespace {

FrameKind kind_arg(const benchmark::State& s) { return static_cast<FrameKind>(s.range(0)); }

Scene scene(double snr_db, const FrameConfig& c) {
  Scene s;
  const double G = static_cast<double>(c.M) * c.fast_len();
  s.targets = {Target{4.249, 2.237, std::sqrt(std::pow(10.0, snr_db / 10.0) / G), 0.3}};
  s.noise_power = 1.0;
  return s;
}

void kinds(benchmark::internal::Benchmark* b) {
  for (FrameKind k : kAllKinds) b->Arg(static_cast<int>(k));
  b->Unit(benchmark::kMicrosecond);
}

}  // namespace

static void BM_BuildFrame(benchmark::State& state) {
  const FrameConfig c = link_config(kind_arg(state));
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(build_frame(c, rng));
  state.SetLabel(std::string(to_string(c.kind)));
}
BENCHMARK(BM_BuildFrame)->Apply(kinds);

static void BM_SimulateRx(benchmark::State& state) {
  const FrameConfig c = link_config(kind_arg(state));
  Rng rng(2);
  const TxFrame f = build_frame(c, rng);
  const Scene s = scene(30.0, c);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_rx(f, s, c, rng));
  state.SetLabel(std::string(to_string(c.kind)));
}
BENCHMARK(BM_SimulateRx)->Apply(kinds);

static void BM_EstimateChannel(benchmark::State& state) {
  const FrameConfig c = link_config(kind_arg(state));
  Rng rng(3);
  const TxFrame f = build_frame(c, rng);
  const SampleGrid y = sample_grid(simulate_rx(f, scene(30.0, c), c, rng).target, c.kind, c);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_channel(y, f, c));
  state.SetLabel(std::string(to_string(c.kind)));
}
BENCHMARK(BM_EstimateChannel)->Apply(kinds);

static void BM_FineGridRefine(benchmark::State& state) {
  const FrameConfig c = link_config(kind_arg(state));
  Rng rng(4);
  const TxFrame f = build_frame(c, rng);
  const ChannelEstimate H =
      estimate_channel(sample_grid(simulate_rx(f, scene(30.0, c), c, rng).target, c.kind, c), f, c);
  const GridPeak init = integer_grid_estimate(H, c);
  const EstimatorConfig est;
  for (auto _ : state) benchmark::DoNotOptimize(fine_grid_refine(H, c, init, est));
  state.SetLabel(std::string(to_string(c.kind)));
}
BENCHMARK(BM_FineGridRefine)->Apply(kinds);

static void BM_Crb(benchmark::State& state) {
  const FrameConfig c = link_config(kind_arg(state));
  const ParamVector th = scene(30.0, c).targets;
  for (auto _ : state) benchmark::DoNotOptimize(crb(th, c.kind, c, 1.0));
  state.SetLabel(std::string(to_string(c.kind)));
}
BENCHMARK(BM_Crb)->Apply(kinds);

static void BM_OutlierUb(benchmark::State& state) {
  const FrameConfig c = link_config(kind_arg(state));
  const Target t = scene(18.0, c).targets[0];
  for (auto _ : state) benchmark::DoNotOptimize(outlier_ub(c.kind, c, t, 1.0));
  state.SetLabel(std::string(to_string(c.kind)));
}
BENCHMARK(BM_OutlierUb)->Apply(kinds);

static void BM_RiceExact(benchmark::State& state) {
  const RicePair p{static_cast<double>(state.range(0)), state.range(0) + 1.5, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(pr_rice_greater_exact(p));
}
BENCHMARK(BM_RiceExact)->Arg(2)->Arg(10)->Arg(20);
BENCHMARK_MAIN();
