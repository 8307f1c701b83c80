#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "eegbench/dataset.hpp"
#include "eegbench/fft.hpp"
#include "eegbench/rng.hpp"

namespace eegbench {

namespace {

// Gaussian noise shaped in the frequency domain by an amplitude profile.
std::vector<double> shaped_noise(std::size_t n, int fs, const std::function<double(double)>& amplitude,
                                 CounterRng& rng) {
  std::vector<Complex> half(n / 2 + 1);
  const double df = static_cast<double>(fs) / static_cast<double>(n);
  for (std::size_t k = 0; k < half.size(); ++k) {
    const double a = amplitude(static_cast<double>(k) * df);
    const double re = rng.normal();
    const double im = rng.normal();
    half[k] = a == 0.0 ? Complex(0.0, 0.0) : Complex(a * re, a * im);
  }
  return irfft(half, n);
}

// Raised-cosine taper: 1 inside [lo, hi], falling to 0 over `w` Hz outside.
double band_gate(double f, double lo, double hi, double w) {
  if (f >= lo && f <= hi) return 1.0;
  const double d = f < lo ? lo - f : f - hi;
  if (d >= w) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * d / w));
}

void standardize_inplace(std::span<double> x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - m) * (v - m);
  const double sd = std::sqrt(var / static_cast<double>(x.size()));
  for (double& v : x) v = sd > 0.0 ? (v - m) / sd : 0.0;
}

std::vector<double> eeg_row(std::size_t n, int fs, CounterRng& rng) {
  const double top = std::min(80.0, 0.45 * fs);
  // Pink background (power ~ 1/f) plus an alpha rhythm near 10 Hz.
  const double alpha_f = rng.uniform(9.5, 10.5);
  const double alpha_gain = rng.uniform(0.8, 1.2);
  auto amp = [=](double f) {
    if (f <= 0.0) return 0.0;
    const double pink = 1.0 / std::sqrt(std::max(f, 1.0));
    const double alpha = alpha_gain * std::exp(-0.5 * std::pow((f - alpha_f) / 0.5, 2)) / std::sqrt(alpha_f);
    return (pink + alpha) * band_gate(f, 1.0, top, 0.5);
  };
  return shaped_noise(n, fs, amp, rng);
}

std::vector<double> eog_row(std::size_t n, int fs, CounterRng& rng) {
  const double duration = static_cast<double>(n) / fs;
  std::vector<double> x(n, 0.0);
  // Blinks as Gaussian bumps, saccades as smoothed steps.
  const int blinks = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::max(1.0, 1.5 * duration)) + 1));
  for (int b = 0; b < blinks; ++b) {
    const double t0 = rng.uniform(0.1, 0.9) * duration;
    const double width = rng.uniform(0.06, 0.15);
    const double amp = rng.uniform(0.6, 1.4);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      x[i] += amp * std::exp(-0.5 * std::pow((t - t0) / width, 2));
    }
  }
  const double step_t = rng.uniform(0.0, 1.0) * duration;
  const double step_amp = rng.uniform(-0.5, 0.5);
  const double drift = rng.uniform(-0.3, 0.3);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    x[i] += step_amp * std::tanh((t - step_t) / 0.08) + drift * t / duration;
  }
  // Band-limit to 0.3-10 Hz.
  auto spec = rfft(x);
  const double df = static_cast<double>(fs) / static_cast<double>(n);
  for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= band_gate(static_cast<double>(k) * df, 0.3, 9.0, 1.0);
  return irfft(spec, n);
}

std::vector<double> emg_row(std::size_t n, int fs, CounterRng& rng) {
  const double top = std::min(120.0, 0.45 * fs);
  auto amp = [=](double f) { return band_gate(f, 20.0, top, 2.0); };
  auto x = shaped_noise(n, fs, amp, rng);
  const double duration = static_cast<double>(n) / fs;
  std::vector<double> env(n, 0.15);
  const int bursts = 1 + static_cast<int>(rng.below(3));
  for (int b = 0; b < bursts; ++b) {
    const double t0 = rng.uniform(0.0, 1.0) * duration;
    const double len = rng.uniform(0.15, 0.5) * duration;
    const double gain = rng.uniform(0.7, 1.5);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      if (t >= t0 && t <= t0 + len) env[i] += gain * std::pow(std::sin(std::numbers::pi * (t - t0) / len), 2);
    }
  }
  for (std::size_t i = 0; i < n; ++i) x[i] *= env[i];
  return x;
}

}  // namespace

SegmentBank synth_surrogate(BankKind kind, std::size_t count, std::uint64_t seed, int fs, std::size_t length) {
  if (count == 0) throw InvalidInput("synth_surrogate: count must be >= 1");
  if (fs <= 0 || length < 16) throw InvalidInput("synth_surrogate: need fs > 0 and at least 16 samples");
  SegmentBank bank;
  bank.kind = kind;
  bank.fs = fs;
  bank.matrix = Matrix(count, length);
  const CounterRng root(seed, 0x5C6 + static_cast<std::uint64_t>(kind));
  for (std::size_t r = 0; r < count; ++r) {
    CounterRng rng = root.fork(r);
    std::vector<double> row;
    switch (kind) {
      case BankKind::EEG: row = eeg_row(length, fs, rng); break;
      case BankKind::EOG: row = eog_row(length, fs, rng); break;
      case BankKind::EMG: row = emg_row(length, fs, rng); break;
    }
    standardize_inplace(row);
    std::copy(row.begin(), row.end(), bank.matrix.row(r).begin());
  }
  return bank;
}

SegmentBank synth_surrogate(BankKind kind, std::size_t count, std::uint64_t seed) {
  if (kind == BankKind::EMG) return synth_surrogate(kind, count, seed, 512, 1024);
  return synth_surrogate(kind, count, seed, 256, 512);
}

}  // namespace eegbench
