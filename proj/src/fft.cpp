#include "eegbench/fft.hpp"

#include <cmath>
#include <numbers>

namespace eegbench {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void radix2_inplace(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        // Twiddles evaluated directly rather than by recurrence to keep long transforms accurate.
        const Complex w(std::cos(ang * static_cast<double>(k)), std::sin(ang * static_cast<double>(k)));
        const Complex u = a[i + k];
        const Complex v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

std::vector<Complex> bluestein(std::span<const Complex> in, bool inverse) {
  const std::size_t n = in.size();
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small.
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = Complex(std::cos(ang), std::sin(ang));
  }
  std::vector<Complex> a(m), b(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = in[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
  radix2_inplace(a, false);
  radix2_inplace(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  radix2_inplace(a, true);
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] / static_cast<double>(m) * chirp[k];
  return out;
}

}  // namespace

std::vector<Complex> fft(std::span<const Complex> in, bool inverse) {
  std::vector<Complex> out;
  if (in.empty()) return out;
  if (is_pow2(in.size())) {
    out.assign(in.begin(), in.end());
    radix2_inplace(out, inverse);
  } else {
    out = bluestein(in, inverse);
  }
  if (inverse)
    for (auto& v : out) v /= static_cast<double>(in.size());
  return out;
}

std::vector<Complex> rfft(std::span<const double> in) {
  std::vector<Complex> c(in.begin(), in.end());
  auto full = fft(c, false);
  full.resize(in.size() / 2 + 1);
  return full;
}

std::vector<double> irfft(std::span<const Complex> half, std::size_t n) {
  std::vector<Complex> full(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (k < half.size())
      full[k] = half[k];
    else
      full[k] = std::conj(half[n - k]);
  }
  // Bins that must be real for a real signal.
  full[0] = Complex(full[0].real(), 0.0);
  if (n % 2 == 0 && n / 2 < half.size()) full[n / 2] = Complex(full[n / 2].real(), 0.0);
  auto t = fft(full, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = t[i].real();
  return out;
}

}  // namespace eegbench
