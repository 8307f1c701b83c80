#pragma once

#include <cstddef>
#include <span>

// Dense and convolution kernels used by the autodiff primitives.
//
// Every kernel exists twice: a serial reference and an OpenMP version. The parallel
// versions split work over independent output elements and keep the per-element
// accumulation order of the serial loop, so both produce bit-identical results for any
// thread count. Tests compare the two directly; bench/ times them.
namespace eegbench::kernels {

struct Conv1dShape {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t length = 1;  // input length
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t pad = 0;

  std::size_t out_length() const { return (length + 2 * pad - kernel) / stride + 1; }
};

namespace serial {
// c[m,n] (+)= a[m,k] * b[k,n]
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);
// c[k,n] (+)= a[m,k]^T * b[m,n]
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);
// c[m,k] (+)= a[m,n] * b[k,n]^T
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);

void conv1d_forward(const Conv1dShape& s, std::span<const double> x, std::span<const double> w,
                    std::span<const double> bias, std::span<double> y);
void conv1d_backward_input(const Conv1dShape& s, std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx);
void conv1d_backward_weight(const Conv1dShape& s, std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> dbias);
}  // namespace serial

namespace parallel {
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);

void conv1d_forward(const Conv1dShape& s, std::span<const double> x, std::span<const double> w,
                    std::span<const double> bias, std::span<double> y);
void conv1d_backward_input(const Conv1dShape& s, std::span<const double> dy, std::span<const double> w,
                           std::span<double> dx);
void conv1d_backward_weight(const Conv1dShape& s, std::span<const double> dy, std::span<const double> x,
                            std::span<double> dw, std::span<double> dbias);
}  // namespace parallel

}  // namespace eegbench::kernels
