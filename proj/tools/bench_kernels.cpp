// Benchmark pitting the OpenMP kernels against the serial reference
// implementations on production-sized workloads (FCN-shaped convolutions,
// length-300 DCTs, full model inference).

#include <benchmark/benchmark.h>

#include <vector>

#include "vitals/model.hpp"
#include "vitals/nn.hpp"
#include "vitals/ref.hpp"
#include "vitals/rng.hpp"
#include "vitals/signal.hpp"

namespace {

using vitals::SplitMix64;

vitals::nn::Tensor1D random_tensor(int ch, int len, SplitMix64& rng) {
    vitals::nn::Tensor1D t(ch, len);
    for (double& v : t.values) v = rng.next_symmetric(1.0);
    return t;
}

vitals::nn::Conv1d random_conv(int in_ch, int out_ch, int kernel, SplitMix64& rng) {
    vitals::nn::Conv1d c;
    c.in_channels = in_ch;
    c.out_channels = out_ch;
    c.kernel = kernel;
    c.w.resize(static_cast<std::size_t>(out_ch) * in_ch * kernel);
    c.b.assign(static_cast<std::size_t>(out_ch), 0.0);
    for (double& w : c.w) w = rng.next_symmetric(0.3);
    return c;
}

void BM_conv1d_parallel(benchmark::State& state) {
    SplitMix64 rng(1);
    auto x = random_tensor(16, 300, rng);
    auto conv = random_conv(16, 32, 5, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(vitals::nn::conv1d_forward(x, conv));
    }
}
BENCHMARK(BM_conv1d_parallel);

void BM_conv1d_serial_ref(benchmark::State& state) {
    SplitMix64 rng(1);
    auto x = random_tensor(16, 300, rng);
    auto conv = random_conv(16, 32, 5, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(vitals::ref::conv1d_forward(x, conv));
    }
}
BENCHMARK(BM_conv1d_serial_ref);

void BM_dct300_parallel(benchmark::State& state) {
    SplitMix64 rng(2);
    std::vector<double> x(300);
    for (double& v : x) v = rng.next_symmetric(1.0);
    vitals::dct2_forward(x);  // warm the plan cache
    for (auto _ : state) {
        benchmark::DoNotOptimize(vitals::dct2_forward(x));
    }
}
BENCHMARK(BM_dct300_parallel);

void BM_dct300_serial_ref(benchmark::State& state) {
    SplitMix64 rng(2);
    std::vector<double> x(300);
    for (double& v : x) v = rng.next_symmetric(1.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(vitals::ref::dct2_forward(x));
    }
}
BENCHMARK(BM_dct300_serial_ref);

vitals::Window bench_window() {
    SplitMix64 rng(3);
    vitals::Window w;
    w.channels = 1;
    w.length = 300;
    w.values.resize(300);
    for (double& v : w.values) v = rng.next_symmetric(1.0);
    return w;
}

void BM_predict_fcn_parallel(benchmark::State& state) {
    auto model = vitals::build_model(vitals::ArchitectureId::Fcn, vitals::TaskId::Hr, 300, 7);
    auto w = bench_window();
    for (auto _ : state) {
        benchmark::DoNotOptimize(vitals::predict(model, w));
    }
}
BENCHMARK(BM_predict_fcn_parallel);

void BM_predict_fcn_serial_ref(benchmark::State& state) {
    auto model = vitals::build_model(vitals::ArchitectureId::Fcn, vitals::TaskId::Hr, 300, 7);
    auto w = bench_window();
    for (auto _ : state) {
        benchmark::DoNotOptimize(vitals::ref::predict(model, w));
    }
}
BENCHMARK(BM_predict_fcn_serial_ref);

void BM_train_batch_fcn(benchmark::State& state) {
    auto model = vitals::build_model(vitals::ArchitectureId::Fcn, vitals::TaskId::Hr, 300, 7);
    SplitMix64 rng(4);
    std::vector<vitals::nn::Tensor1D> xs;
    for (int b = 0; b < 32; ++b) xs.push_back(random_tensor(1, 300, rng));
    for (auto _ : state) {
        vitals::nn::Tape tape;
        auto outs = vitals::nn::forward_train(model.layers, xs, tape, false);
        std::vector<vitals::nn::Tensor1D> up(xs.size(), vitals::nn::Tensor1D(1, 1));
        for (auto& u : up) u.values[0] = 1.0 / 32.0;
        auto grads = vitals::nn::zero_grads(model.layers);
        benchmark::DoNotOptimize(vitals::nn::backward(model.layers, tape, std::move(up), grads));
        benchmark::DoNotOptimize(outs);
    }
}
BENCHMARK(BM_train_batch_fcn);

}  // namespace

BENCHMARK_MAIN();
