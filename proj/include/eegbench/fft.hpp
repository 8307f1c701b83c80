#pragma once

#include <complex>
#include <span>
#include <vector>

namespace eegbench {

using Complex = std::complex<double>;

// Unnormalized DFT of any length: radix-2 for powers of two, Bluestein otherwise.
// The inverse transform divides by N.
std::vector<Complex> fft(std::span<const Complex> in, bool inverse = false);

// One-sided spectrum of a real signal: floor(N/2)+1 bins.
std::vector<Complex> rfft(std::span<const double> in);

// Inverse of rfft for a real signal of length n.
std::vector<double> irfft(std::span<const Complex> half, std::size_t n);

}  // namespace eegbench
