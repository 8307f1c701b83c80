#include "eegbench/kernels.hpp"

#include <vector>

namespace eegbench::kernels {

namespace {

// Row bodies shared by both variants; only the outer loop differs.

void gemm_nn_row(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t i,
                 std::size_t k, std::size_t n, bool accumulate, std::vector<double>& acc) {
  acc.assign(n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double aip = a[i * k + p];
    const double* brow = b.data() + p * n;
    for (std::size_t j = 0; j < n; ++j) acc[j] += aip * brow[j];
  }
  double* crow = c.data() + i * n;
  for (std::size_t j = 0; j < n; ++j) crow[j] = accumulate ? crow[j] + acc[j] : acc[j];
}

void gemm_tn_row(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                 std::size_t kk, std::size_t k, std::size_t n, bool accumulate, std::vector<double>& acc) {
  acc.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const double arc = a[r * k + kk];
    if (arc == 0.0) continue;
    const double* brow = b.data() + r * n;
    for (std::size_t j = 0; j < n; ++j) acc[j] += arc * brow[j];
  }
  double* crow = c.data() + kk * n;
  for (std::size_t j = 0; j < n; ++j) crow[j] = accumulate ? crow[j] + acc[j] : acc[j];
}

void gemm_nt_row(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t i,
                 std::size_t k, std::size_t n, bool accumulate) {
  const double* arow = a.data() + i * n;
  for (std::size_t kk = 0; kk < k; ++kk) {
    const double* brow = b.data() + kk * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
    double& dst = c[i * k + kk];
    dst = accumulate ? dst + acc : acc;
  }
}

void conv_forward_plane(const Conv1dShape& s, std::span<const double> x, std::span<const double> w,
                        std::span<const double> bias, std::span<double> y, std::size_t plane,
                        std::vector<double>& acc) {
  const std::size_t bi = plane / s.out_channels;
  const std::size_t co = plane % s.out_channels;
  const std::size_t lo = s.out_length();
  acc.assign(lo, 0.0);
  for (std::size_t ci = 0; ci < s.in_channels; ++ci) {
    const double* xrow = x.data() + (bi * s.in_channels + ci) * s.length;
    const double* wrow = w.data() + (co * s.in_channels + ci) * s.kernel;
    for (std::size_t kk = 0; kk < s.kernel; ++kk) {
      const double wk = wrow[kk];
      for (std::size_t t = 0; t < lo; ++t) {
        const std::ptrdiff_t l = static_cast<std::ptrdiff_t>(t * s.stride + kk) - static_cast<std::ptrdiff_t>(s.pad);
        if (l < 0 || l >= static_cast<std::ptrdiff_t>(s.length)) continue;
        acc[t] += wk * xrow[l];
      }
    }
  }
  double* yrow = y.data() + plane * lo;
  const double b = bias.empty() ? 0.0 : bias[co];
  for (std::size_t t = 0; t < lo; ++t) yrow[t] = acc[t] + b;
}

void conv_backward_input_plane(const Conv1dShape& s, std::span<const double> dy, std::span<const double> w,
                               std::span<double> dx, std::size_t plane, std::vector<double>& acc) {
  const std::size_t bi = plane / s.in_channels;
  const std::size_t ci = plane % s.in_channels;
  const std::size_t lo = s.out_length();
  acc.assign(s.length, 0.0);
  for (std::size_t co = 0; co < s.out_channels; ++co) {
    const double* dyrow = dy.data() + (bi * s.out_channels + co) * lo;
    const double* wrow = w.data() + (co * s.in_channels + ci) * s.kernel;
    for (std::size_t kk = 0; kk < s.kernel; ++kk) {
      const double wk = wrow[kk];
      for (std::size_t t = 0; t < lo; ++t) {
        const std::ptrdiff_t l = static_cast<std::ptrdiff_t>(t * s.stride + kk) - static_cast<std::ptrdiff_t>(s.pad);
        if (l < 0 || l >= static_cast<std::ptrdiff_t>(s.length)) continue;
        acc[static_cast<std::size_t>(l)] += wk * dyrow[t];
      }
    }
  }
  double* dxrow = dx.data() + plane * s.length;
  for (std::size_t l = 0; l < s.length; ++l) dxrow[l] += acc[l];
}

void conv_backward_weight_pair(const Conv1dShape& s, std::span<const double> dy, std::span<const double> x,
                               std::span<double> dw, std::size_t pair) {
  const std::size_t co = pair / s.in_channels;
  const std::size_t ci = pair % s.in_channels;
  const std::size_t lo = s.out_length();
  for (std::size_t kk = 0; kk < s.kernel; ++kk) {
    double acc = 0.0;
    for (std::size_t bi = 0; bi < s.batch; ++bi) {
      const double* dyrow = dy.data() + (bi * s.out_channels + co) * lo;
      const double* xrow = x.data() + (bi * s.in_channels + ci) * s.length;
      for (std::size_t t = 0; t < lo; ++t) {
        const std::ptrdiff_t l = static_cast<std::ptrdiff_t>(t * s.stride + kk) - static_cast<std::ptrdiff_t>(s.pad);
        if (l < 0 || l >= static_cast<std::ptrdiff_t>(s.length)) continue;
        acc += dyrow[t] * xrow[l];
      }
    }
    dw[pair * s.kernel + kk] += acc;
  }
}

void conv_backward_bias(const Conv1dShape& s, std::span<const double> dy, std::span<double> dbias, std::size_t co) {
  const std::size_t lo = s.out_length();
  double acc = 0.0;
  for (std::size_t bi = 0; bi < s.batch; ++bi) {
    const double* dyrow = dy.data() + (bi * s.out_channels + co) * lo;
    for (std::size_t t = 0; t < lo; ++t) acc += dyrow[t];
  }
  dbias[co] += acc;
}

}  // namespace

namespace serial {

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  std::vector<double> acc;
  for (std::size_t i = 0; i < m; ++i) gemm_nn_row(a, b, c, i, k, n, accumulate, acc);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  std::vector<double> acc;
  for (std::size_t kk = 0; kk < k; ++kk) gemm_tn_row(a, b, c, m, kk, k, n, accumulate, acc);
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) gemm_nt_row(a, b, c, i, k, n, accumulate);
}

void conv1d_forward(const Conv1dShape& s, std::span<const double> x, std::span<const double> w,
                    std::span<const double> bias, std::span<double> y) {
  std::vector<double> acc;
  for (std::size_t p = 0; p < s.batch * s.out_channels; ++p) conv_forward_plane(s, x, w, bias, y, p, acc);
}

void conv1d_backward_input(const Conv1dShape& s, std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx) {
  std::vector<double> acc;
  for (std::size_t p = 0; p < s.batch * s.in_channels; ++p) conv_backward_input_plane(s, dy, w, dx, p, acc);
}

void conv1d_backward_weight(const Conv1dShape& s, std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> dbias) {
  for (std::size_t p = 0; p < s.out_channels * s.in_channels; ++p) conv_backward_weight_pair(s, dy, x, dw, p);
  if (!dbias.empty())
    for (std::size_t co = 0; co < s.out_channels; ++co) conv_backward_bias(s, dy, dbias, co);
}

}  // namespace serial

namespace parallel {

// Small problems stay on the calling thread; the fork/join cost dominates otherwise.
constexpr std::size_t kMinParallelWork = 1 << 14;

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  const long rows = static_cast<long>(m);
#pragma omp parallel if (m * k * n >= kMinParallelWork)
  {
    std::vector<double> acc;
#pragma omp for schedule(static)
    for (long i = 0; i < rows; ++i) gemm_nn_row(a, b, c, static_cast<std::size_t>(i), k, n, accumulate, acc);
  }
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  const long rows = static_cast<long>(k);
#pragma omp parallel if (m * k * n >= kMinParallelWork)
  {
    std::vector<double> acc;
#pragma omp for schedule(static)
    for (long kk = 0; kk < rows; ++kk) gemm_tn_row(a, b, c, m, static_cast<std::size_t>(kk), k, n, accumulate, acc);
  }
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  const long rows = static_cast<long>(m);
#pragma omp parallel for schedule(static) if (m * k * n >= kMinParallelWork)
  for (long i = 0; i < rows; ++i) gemm_nt_row(a, b, c, static_cast<std::size_t>(i), k, n, accumulate);
}

namespace {
std::size_t conv_work(const Conv1dShape& s) {
  return s.batch * s.in_channels * s.out_channels * s.kernel * s.out_length();
}
}  // namespace

void conv1d_forward(const Conv1dShape& s, std::span<const double> x, std::span<const double> w,
                    std::span<const double> bias, std::span<double> y) {
  const long planes = static_cast<long>(s.batch * s.out_channels);
#pragma omp parallel if (conv_work(s) >= kMinParallelWork)
  {
    std::vector<double> acc;
#pragma omp for schedule(static)
    for (long p = 0; p < planes; ++p) conv_forward_plane(s, x, w, bias, y, static_cast<std::size_t>(p), acc);
  }
}

void conv1d_backward_input(const Conv1dShape& s, std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx) {
  const long planes = static_cast<long>(s.batch * s.in_channels);
#pragma omp parallel if (conv_work(s) >= kMinParallelWork)
  {
    std::vector<double> acc;
#pragma omp for schedule(static)
    for (long p = 0; p < planes; ++p) conv_backward_input_plane(s, dy, w, dx, static_cast<std::size_t>(p), acc);
  }
}

void conv1d_backward_weight(const Conv1dShape& s, std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> dbias) {
  const long pairs = static_cast<long>(s.out_channels * s.in_channels);
  const bool big = conv_work(s) >= kMinParallelWork;
#pragma omp parallel for schedule(static) if (big)
  for (long p = 0; p < pairs; ++p) conv_backward_weight_pair(s, dy, x, dw, static_cast<std::size_t>(p));
  if (!dbias.empty()) {
    const long outs = static_cast<long>(s.out_channels);
#pragma omp parallel for schedule(static) if (big)
    for (long co = 0; co < outs; ++co) conv_backward_bias(s, dy, dbias, static_cast<std::size_t>(co));
  }
}

}  // namespace parallel

}  // namespace eegbench::kernels
