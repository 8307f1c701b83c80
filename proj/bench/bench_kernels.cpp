// Serial reference vs OpenMP kernels at the layer sizes of the full preset.
#include <benchmark/benchmark.h>

#include <vector>

#include "eegbench/kernels.hpp"
#include "eegbench/rng.hpp"

namespace kn = eegbench::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t stream) {
  eegbench::CounterRng rng(7, stream);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1, 1);
  return v;
}

// Dense layer of the FCNN: [batch, 512] x [512, 512].
template <auto Gemm>
void BM_gemm_nn(benchmark::State& state) {
  const std::size_t m = 64, k = static_cast<std::size_t>(state.range(0)), n = k;
  const auto a = random_vec(m * k, 1), b = random_vec(k * n, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    Gemm(a, b, c, m, k, n, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(m * k * n));
}

kn::Conv1dShape conv_shape(std::size_t len) { return {16, 64, 64, len, 3, 1, 1}; }

// k3n64s1 layer of the simple CNN.
template <auto Conv>
void BM_conv_forward(benchmark::State& state) {
  const auto s = conv_shape(static_cast<std::size_t>(state.range(0)));
  const auto x = random_vec(s.batch * s.in_channels * s.length, 3);
  const auto w = random_vec(s.out_channels * s.in_channels * s.kernel, 4);
  const auto b = random_vec(s.out_channels, 5);
  std::vector<double> y(s.batch * s.out_channels * s.out_length());
  for (auto _ : state) {
    Conv(s, x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
}

template <auto Conv>
void BM_conv_backward_weight(benchmark::State& state) {
  const auto s = conv_shape(static_cast<std::size_t>(state.range(0)));
  const auto x = random_vec(s.batch * s.in_channels * s.length, 3);
  const auto dy = random_vec(s.batch * s.out_channels * s.out_length(), 6);
  std::vector<double> dw(s.out_channels * s.in_channels * s.kernel), db(s.out_channels);
  for (auto _ : state) {
    Conv(s, dy, x, dw, db);
    benchmark::DoNotOptimize(dw.data());
  }
}

}  // namespace

BENCHMARK(BM_gemm_nn<kn::serial::gemm_nn>)->Name("gemm_nn/serial")->Arg(128)->Arg(512);
BENCHMARK(BM_gemm_nn<kn::parallel::gemm_nn>)->Name("gemm_nn/parallel")->Arg(128)->Arg(512);
BENCHMARK(BM_conv_forward<kn::serial::conv1d_forward>)->Name("conv1d_forward/serial")->Arg(512);
BENCHMARK(BM_conv_forward<kn::parallel::conv1d_forward>)->Name("conv1d_forward/parallel")->Arg(512);
BENCHMARK(BM_conv_backward_weight<kn::serial::conv1d_backward_weight>)->Name("conv1d_backward_weight/serial")->Arg(512);
BENCHMARK(BM_conv_backward_weight<kn::parallel::conv1d_backward_weight>)
    ->Name("conv1d_backward_weight/parallel")
    ->Arg(512);

BENCHMARK_MAIN();
