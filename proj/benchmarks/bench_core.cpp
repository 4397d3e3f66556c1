#include <benchmark/benchmark.h>

#include <random>

#include "vot/data.hpp"
#include "vot/decoder.hpp"
#include "vot/model.hpp"
#include "vot/numerics/ops.hpp"
#include "vot/numerics/svd3.hpp"

using namespace vot;
using numerics::Tensor;

namespace {

Tensor random_tensor(numerics::Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(numerics::shape_numel(shape));
  for (auto& x : v) x = n(rng);
  return Tensor(std::move(shape), std::move(v));
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_tensor({n, n}, 1), b = random_tensor({n, n}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(numerics::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(128);

void BM_Attention(benchmark::State& state) {
  const auto tokens = static_cast<std::size_t>(state.range(0));
  const Tensor q = random_tensor({4, tokens, 16}, 1), k = random_tensor({4, tokens, 16}, 2),
               v = random_tensor({4, tokens, 16}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(numerics::scaled_dot_attention(q, k, v));
}
BENCHMARK(BM_Attention)->Arg(17)->Arg(65);

void BM_DecoderForward(benchmark::State& state) {
  model::ModelConfig mc;
  mc.decoder.variant = state.range(0) == 0 ? decoder::Variant::kTimeSpace : decoder::Variant::kFull;
  model::VotModel model(mc, 1);
  const Tensor features = random_tensor({4, 16, 64}, 4);
  numerics::NoGradGuard no_grad;
  for (auto _ : state) benchmark::DoNotOptimize(model.forward_raw(features));
  state.SetLabel(decoder::to_string(mc.decoder.variant));
}
BENCHMARK(BM_DecoderForward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TrainingStep(benchmark::State& state) {
  model::ModelConfig mc;
  model::VotModel model(mc, 1);
  const Tensor features = random_tensor({4, 16, 64}, 4);
  for (auto _ : state) {
    numerics::Tape tape;
    const Tensor loss = numerics::sum(model.forward_raw(features));
    tape.backward(loss);
  }
}
BENCHMARK(BM_TrainingStep)->Unit(benchmark::kMillisecond);

void BM_Svd3(benchmark::State& state) {
  Eigen::Matrix3d m;
  m << 0.9, -0.2, 0.4, 0.1, 1.1, -0.3, 0.5, 0.2, 0.8;
  for (auto _ : state) benchmark::DoNotOptimize(numerics::svd3(m));
}
BENCHMARK(BM_Svd3);

void BM_Render(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  const auto world = data::make_world(3);
  const auto k = data::intrinsics_profile("default", size, size);
  for (auto _ : state) {
    benchmark::DoNotOptimize(data::render(world, geometry::Pose::identity(), k, size, size));
  }
}
BENCHMARK(BM_Render)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
