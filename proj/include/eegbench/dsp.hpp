#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "eegbench/filter.hpp"
#include "eegbench/signal.hpp"

namespace eegbench {

enum class PsdWindow { rectangular, hamming };

// One-sided periodogram with nfft equal to the segment length.
struct PsdEstimate {
  std::vector<double> freqs;  // Hz, ascending from 0
  std::vector<double> power;  // unit^2 / Hz
  double fs = 0;
  std::size_t nfft = 0;

  double df() const { return fs / static_cast<double>(nfft); }
};

PsdEstimate psd(const Segment& s, PsdWindow window = PsdWindow::rectangular);

// Canonical EEG bands partitioning 1-80 Hz: [1,4) [4,8) [8,13) [13,30) [30,80].
struct BandPowerRatios {
  double delta = 0, theta = 0, alpha = 0, beta = 0, gamma = 0;

  std::array<double, 5> as_array() const { return {delta, theta, alpha, beta, gamma}; }
  double sum() const { return delta + theta + alpha + beta + gamma; }
};

inline constexpr std::array<std::string_view, 5> kBandNames = {"delta", "theta", "alpha", "beta", "gamma"};
inline constexpr std::array<double, 6> kBandEdges = {1.0, 4.0, 8.0, 13.0, 30.0, 80.0};

BandPowerRatios band_power_ratios(const Segment& s);

// Polyphase rational resampling; output length round(len * fs_to / fs).
Segment resample(const Segment& s, int fs_to);

}  // namespace eegbench
