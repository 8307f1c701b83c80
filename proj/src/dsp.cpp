#include "eegbench/dsp.hpp"

#include <cmath>
#include <numeric>
#include <numbers>
#include <string>

#include "eegbench/fft.hpp"

namespace eegbench {

PsdEstimate psd(const Segment& s, PsdWindow window) {
  const std::size_t n = s.size();
  if (n < 2) throw InvalidInput("psd: segment needs at least 2 samples");
  std::vector<double> x(s.samples());
  double window_power = 1.0;  // mean of w^2
  if (window == PsdWindow::hamming) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                               static_cast<double>(n - 1));
      x[i] *= w;
      acc += w * w;
    }
    window_power = acc / static_cast<double>(n);
  }
  const auto spec = rfft(x);
  PsdEstimate out;
  out.fs = s.fs();
  out.nfft = n;
  out.freqs.resize(spec.size());
  out.power.resize(spec.size());
  const double scale = 1.0 / (static_cast<double>(s.fs()) * static_cast<double>(n) * window_power);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    out.freqs[k] = static_cast<double>(k) * out.df();
    const bool nyquist = (n % 2 == 0) && k == n / 2;
    const double fold = (k == 0 || nyquist) ? 1.0 : 2.0;
    out.power[k] = fold * std::norm(spec[k]) * scale;
  }
  return out;
}

BandPowerRatios band_power_ratios(const Segment& s) {
  if (s.fs() < 160) throw InvalidInput("band_power_ratios: fs must be >= 160 Hz, got " + std::to_string(s.fs()));
  const PsdEstimate p = psd(s);
  std::array<double, 5> band{};
  for (std::size_t k = 0; k < p.freqs.size(); ++k) {
    const double f = p.freqs[k];
    if (f < kBandEdges[0] || f > kBandEdges[5]) continue;
    std::size_t b = 0;
    while (b < 4 && f >= kBandEdges[b + 1]) ++b;
    band[b] += p.power[k];
  }
  const double total = band[0] + band[1] + band[2] + band[3] + band[4];
  if (!(total > 0.0)) throw DegenerateSignal("band_power_ratios: zero power in 1-80 Hz");
  return {band[0] / total, band[1] / total, band[2] / total, band[3] / total, band[4] / total};
}

namespace {

// Kaiser-windowed sinc lowpass evaluated at the upsampled rate.
std::vector<double> antialias_taps(int up, int down) {
  const int max_rate = std::max(up, down);
  const int half_len = 10 * max_rate;
  // Cutoff at 0.9 of the lower Nyquist limit, in cycles per upsampled sample.
  const double fc = 0.9 * 0.5 / static_cast<double>(max_rate);
  const double beta = 8.0;
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  std::vector<double> h(2 * half_len + 1);
  for (int i = -half_len; i <= half_len; ++i) {
    const double t = static_cast<double>(i);
    const double sinc = i == 0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
    const double r = t / static_cast<double>(half_len);
    const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[i + half_len] = sinc * w;
  }
  // Unity DC gain per polyphase branch after zero stuffing.
  const double sum = std::accumulate(h.begin(), h.end(), 0.0);
  for (double& v : h) v *= static_cast<double>(up) / sum;
  return h;
}

}  // namespace

Segment resample(const Segment& s, int fs_to) {
  if (fs_to <= 0) throw InvalidInput("resample: target rate must be positive");
  if (fs_to == s.fs()) return s;
  const int g = std::gcd(fs_to, s.fs());
  const int up = fs_to / g;
  const int down = s.fs() / g;
  if (up > 4096 || down > 4096)
    throw InvalidInput("resample: unsupported ratio " + std::to_string(fs_to) + "/" + std::to_string(s.fs()));

  const auto h = antialias_taps(up, down);
  const long half = static_cast<long>(h.size() / 2);
  const long n_in = static_cast<long>(s.size());
  const long n_out = std::lround(static_cast<double>(n_in) * up / down);

  // Odd reflection at both ends suppresses edge transients.
  const long pad = std::min(n_in - 1, half / up + 2);
  const auto& x = s.samples();
  auto sample = [&](long i) -> double {
    if (i < 0) {
      if (-i > pad) return 0.0;
      return 2.0 * x[0] - x[static_cast<std::size_t>(-i)];
    }
    if (i >= n_in) {
      const long k = i - (n_in - 1);
      if (k > pad) return 0.0;
      return 2.0 * x[static_cast<std::size_t>(n_in - 1)] - x[static_cast<std::size_t>(n_in - 1 - k)];
    }
    return x[static_cast<std::size_t>(i)];
  };

  std::vector<double> out(static_cast<std::size_t>(n_out));
  for (long m = 0; m < n_out; ++m) {
    // Output sample m sits at position m*down on the upsampled grid; only taps aligned
    // with nonzero (stuffed) inputs contribute.
    const long center = m * down;
    double acc = 0.0;
    const long k_lo = center - half;
    long first = k_lo % up == 0 ? k_lo : k_lo + ((up - (k_lo % up)) % up);
    if (k_lo < 0) first = -((-k_lo) / up) * up;
    for (long k = first; k <= center + half; k += up) {
      if (k < k_lo) continue;
      acc += h[static_cast<std::size_t>(center - k + half)] * sample(k / up);
    }
    out[static_cast<std::size_t>(m)] = acc;
  }
  return Segment(std::move(out), fs_to);
}

}  // namespace eegbench
