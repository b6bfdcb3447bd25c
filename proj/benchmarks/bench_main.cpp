#include "anett/network.hpp"
#include "anett/operators.hpp"
#include "anett/phantom.hpp"
#include "anett/solver.hpp"

#include <benchmark/benchmark.h>

#include <memory>

using namespace anett;

static void BM_RadonForward(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const RadonOperator op(n, ScanGeometry(static_cast<int>(state.range(1)), 3 * n / 2));
    const Vector x = shepp_logan(n).pixels;
    for (auto _ : state) benchmark::DoNotOptimize(op.apply(x));
}
BENCHMARK(BM_RadonForward)->Args({64, 20})->Args({64, 80})->Args({128, 180})->Unit(benchmark::kMillisecond);

static void BM_RadonAdjoint(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const RadonOperator op(n, ScanGeometry(static_cast<int>(state.range(1)), 3 * n / 2));
    const Vector y = op.apply(shepp_logan(n).pixels);
    for (auto _ : state) benchmark::DoNotOptimize(op.apply_adjoint(y));
}
BENCHMARK(BM_RadonAdjoint)->Args({64, 20})->Args({64, 80})->Args({128, 180})->Unit(benchmark::kMillisecond);

static void BM_Fbp(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const RadonOperator op(n, ScanGeometry(static_cast<int>(state.range(1)), 3 * n / 2));
    const Vector y = op.apply(shepp_logan(n).pixels);
    for (auto _ : state) benchmark::DoNotOptimize(op.approximate_inverse(y));
}
BENCHMARK(BM_Fbp)->Args({64, 20})->Args({128, 180})->Unit(benchmark::kMillisecond);

static void BM_ConvForward(benchmark::State& state) {
    const int c = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    Sequential block({Layer::conv(c, c, 1)});
    block.initialize(rng);
    const Tensor x(c, 64, 64, Vector::Random(static_cast<Eigen::Index>(c) * 64 * 64));
    for (auto _ : state) benchmark::DoNotOptimize(block.forward(x));
}
BENCHMARK(BM_ConvForward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_ConvBackward(benchmark::State& state) {
    const int c = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    Sequential block({Layer::conv(c, c, 1)});
    block.initialize(rng);
    const Tensor x(c, 64, 64, Vector::Random(static_cast<Eigen::Index>(c) * 64 * 64));
    Sequential::Tape tape;
    const Tensor y = block.forward(x, &tape);
    for (auto _ : state) {
        auto grads = block.zero_grads();
        benchmark::DoNotOptimize(block.backward(tape, y, &grads));
    }
}
BENCHMARK(BM_ConvBackward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_AdmmIteration(benchmark::State& state) {
    const int n = 64;
    auto ae = std::make_shared<Autoencoder>(AutoencoderArch{}, n, 1);
    const RadonOperator op(n, ScanGeometry(20, 96));
    AnettConfig cfg = AnettConfig::sparse_view();
    cfg.n_iter = 1;
    const AnettRegularizer reg(std::make_shared<NetworkCodec>(ae), cfg.phi, cfg.c);
    const Vector y = op.apply(shepp_logan(n).pixels);
    const AdmmState start = admm_initialize(op, y, reg);
    for (auto _ : state) benchmark::DoNotOptimize(admm_solve(op, y, reg, cfg, start));
}
BENCHMARK(BM_AdmmIteration)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
