#include <doctest.h>

#include <cmath>
#include <numbers>

#include "eegbench/dsp.hpp"
#include "eegbench/fft.hpp"
#include "eegbench/rng.hpp"

using namespace eegbench;
using std::numbers::pi;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

Segment sine(double f, int fs, std::size_t n, double amp = 1.0, double phase = 0.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = amp * std::sin(2 * pi * f * static_cast<double>(i) / fs + phase);
  return Segment(v, fs);
}

// The same deterministic test signal fed to scipy for the reference values below.
Segment probe_signal() {
  std::vector<double> x(256);
  for (int i = 0; i < 256; ++i) x[i] = std::sin(0.3 * i) + 0.5 * std::cos(0.05 * std::pow(i, 1.5)) + 0.01 * i;
  return Segment(x, 256);
}

}  // namespace

TEST_CASE("fft matches a direct DFT for power-of-two and other lengths") {
  for (std::size_t n : {1u, 2u, 8u, 17u, 64u, 100u}) {
    const auto re = noise(n, n), im = noise(n, n + 100);
    std::vector<Complex> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = {re[i], im[i]};
    const auto X = fft(x);
    for (std::size_t k = 0; k < n; ++k) {
      Complex ref = 0;
      for (std::size_t t = 0; t < n; ++t) ref += x[t] * std::polar(1.0, -2 * pi * double(k * t) / double(n));
      CHECK(std::abs(X[k] - ref) < 1e-9 * (1 + std::abs(ref)));
    }
    const auto back = fft(X, true);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(back[i] - x[i]) < 1e-12);
  }
}

TEST_CASE("irfft inverts rfft") {
  for (std::size_t n : {16u, 33u, 512u}) {
    const auto x = noise(n, 7);
    const auto half = rfft(x);
    CHECK(half.size() == n / 2 + 1);
    const auto back = irfft(half, n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(back[i] - x[i]) < 1e-12);
  }
}

TEST_CASE("butterworth magnitudes match scipy") {
  const SosFilter hp = design_filter({FilterKind::highpass, {12}, 4, true}, 256);
  const double hp_ref[] = {0.000750105329677367, 0.431245288105094, 0.707106781186547,
                           0.99252229050991,     0.999760995554089, 0.999999742613719};
  const SosFilter bp = design_filter({FilterKind::bandpass, {12, 40}, 4, true}, 256);
  const double bp_ref[] = {0.00021071077465619, 0.292025250576938, 0.707106781186547,
                           0.99999963403667,    0.998878068426059, 0.0494029397390221};
  const double freqs[] = {2, 10, 12, 20, 30, 60};
  for (int i = 0; i < 6; ++i) {
    CHECK(hp.magnitude(freqs[i]) == doctest::Approx(hp_ref[i]).epsilon(1e-10));
    CHECK(bp.magnitude(freqs[i]) == doctest::Approx(bp_ref[i]).epsilon(1e-10));
  }
  CHECK(20 * std::log10(hp.magnitude(2)) <= -40);
  CHECK(std::abs(20 * std::log10(bp.magnitude(std::sqrt(12.0 * 40.0)))) < 0.5);
  CHECK(hp.max_pole_radius() < 1);
  CHECK(bp.max_pole_radius() < 1);
}

TEST_CASE("design rejects cutoffs outside (0, nyquist)") {
  CHECK_THROWS_AS(design_filter({FilterKind::lowpass, {128}, 4, true}, 256), SpecError);
  CHECK_THROWS_AS(design_filter({FilterKind::highpass, {0}, 4, true}, 256), SpecError);
  CHECK_THROWS_AS(design_filter({FilterKind::bandpass, {40, 12}, 4, true}, 256), SpecError);
  CHECK_THROWS_AS(design_filter({FilterKind::bandpass, {12}, 4, true}, 256), SpecError);
}

TEST_CASE("forward-backward filtering matches scipy sosfiltfilt") {
  const Segment x = probe_signal();
  const int idx[] = {0, 1, 50, 128, 200, 255};
  const double hp_ref[] = {-0.0491222976324093, 0.137152131355233, 0.537716455056919,
                           -0.147718712732094,  -0.662377665985696, 0.0399957093996783};
  const double bp_ref[] = {-0.0472700893910168, 0.158846896549439, 0.535146959457032,
                           -0.0914356029574229, -0.295149486260782, 0.106716827122913};
  const double hp_causal[] = {0.339729608749737,  0.285870989944677, 0.00379814157303485,
                              -0.693594593487667, -0.202646535419662, -1.1297734224434};
  const Segment yh = apply_filter(x, {FilterKind::highpass, {12}, 4, true});
  const Segment yb = apply_filter(x, {FilterKind::bandpass, {12, 40}, 4, true});
  const auto yc = sos_filter(design_filter({FilterKind::highpass, {12}, 4, true}, 256), x.view());
  for (int i = 0; i < 6; ++i) {
    CHECK(yh[idx[i]] == doctest::Approx(hp_ref[i]).epsilon(1e-10));
    CHECK(yb[idx[i]] == doctest::Approx(bp_ref[i]).epsilon(1e-10));
    CHECK(yc[idx[i]] == doctest::Approx(hp_causal[i]).epsilon(1e-10));
  }
}

TEST_CASE("filter behaviour on tones") {
  const FilterSpec hp{FilterKind::highpass, {12}, 4, true};
  const FilterSpec bp{FilterKind::bandpass, {12, 40}, 4, true};
  const Segment s2 = sine(2, 256, 512);
  CHECK(rms(apply_filter(s2, hp)) <= 0.01 * rms(s2));
  const Segment s20 = sine(20, 256, 512);
  CHECK(rms(apply_filter(s20, bp)) == doctest::Approx(rms(s20)).epsilon(0.1));
  const Segment zero(std::vector<double>(512, 0.0), 256);
  for (double v : apply_filter(zero, hp).samples()) CHECK(v == 0.0);
  CHECK_THROWS_AS(apply_filter(Segment(std::vector<double>(12, 1.0), 256), hp), InvalidInput);

  // Nearly all-pass band: white-noise variance survives.
  const Segment w(noise(4096, 5), 256);
  const Segment wide = apply_filter(w, {FilterKind::bandpass, {0.5, 120.0}, 4, true});
  CHECK(population_std(wide.view()) == doctest::Approx(population_std(w.view())).epsilon(0.1));
}

TEST_CASE("zero-phase filtering keeps a symmetric pulse centred") {
  std::vector<double> v(512, 0.0);
  for (int i = -20; i <= 20; ++i) v[300 + i] = std::exp(-0.5 * (i / 6.0) * (i / 6.0));
  const Segment y = apply_filter(Segment(v, 256), {FilterKind::lowpass, {20}, 4, true});
  double num = 0, den = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    num += static_cast<double>(i) * y[i];
    den += y[i];
  }
  CHECK(std::abs(num / den - 300.0) <= 1.0);
}

TEST_CASE("psd") {
  const Segment z(std::vector<double>(64, 0.0), 256);
  for (double p : psd(z).power) CHECK(p == 0.0);

  const PsdEstimate p = psd(sine(10, 256, 512));
  CHECK(p.freqs.size() == 257);
  CHECK(p.df() == 0.5);
  double total = 0;
  for (double v : p.power) total += v;
  CHECK(p.power[20] / total >= 0.99);

  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (std::size_t n : {255u, 512u}) {
      const Segment s(noise(n, seed), 256);
      const PsdEstimate e = psd(s);
      double area = 0;
      for (double v : e.power) area += v * e.df();
      double ms = 0;
      for (double v : s.samples()) ms += v * v;
      ms /= static_cast<double>(n);
      CHECK(area == doctest::Approx(ms).epsilon(1e-6));
    }
  }
}

TEST_CASE("band power ratios") {
  const BandPowerRatios a = band_power_ratios(sine(10, 256, 512));
  CHECK(a.alpha >= 0.99);
  const Segment s(noise(512, 11), 256);
  const BandPowerRatios r = band_power_ratios(s);
  CHECK(r.sum() == doctest::Approx(1.0).epsilon(1e-9));
  const BandPowerRatios r2 = band_power_ratios(s.scaled(-7.5));
  for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(r2.as_array()[k] - r.as_array()[k]) < 1e-9);
  CHECK_THROWS_AS(band_power_ratios(Segment(noise(64, 1), 64)), InvalidInput);
  CHECK_THROWS_AS(band_power_ratios(Segment(std::vector<double>(512, 0.0), 256)), DegenerateSignal);
}

TEST_CASE("resample") {
  const Segment s = sine(10, 256, 512);
  const Segment up = resample(s, 512);
  CHECK(up.size() == 1024);
  CHECK(up.fs() == 512);
  const PsdEstimate p = psd(up);
  const auto peak = std::max_element(p.power.begin(), p.power.end()) - p.power.begin();
  CHECK(p.freqs[static_cast<std::size_t>(peak)] == doctest::Approx(10.0));

  CHECK(resample(s, 256).samples() == s.samples());
  CHECK(resample(Segment(noise(100, 1), 100), 64).size() == 64);

  // Band-limited round trip.
  std::vector<double> v(512);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = static_cast<double>(i) / 256;
    v[i] = std::sin(2 * pi * 5 * t) + 0.5 * std::sin(2 * pi * 17 * t + 1) + 0.3 * std::cos(2 * pi * 31 * t);
  }
  const Segment bl(v, 256);
  const Segment back = resample(resample(bl, 512), 256);
  std::vector<double> d(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) d[i] = back[i] - v[i];
  CHECK(rms(d) < 0.02 * rms(bl));
  CHECK_THROWS_AS(resample(s, 0), InvalidInput);
}
