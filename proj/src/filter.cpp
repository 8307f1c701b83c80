#include "eegbench/filter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace eegbench {

namespace {

using Cplx = std::complex<double>;

struct Zpk {
  std::vector<Cplx> zeros;
  std::vector<Cplx> poles;
};

void validate(const FilterSpec& spec, double fs) {
  if (!(fs > 0)) throw SpecError("filter: sampling rate must be positive");
  if (spec.order < 1) throw SpecError("filter: order must be >= 1");
  const bool band = spec.kind == FilterKind::bandpass || spec.kind == FilterKind::bandstop;
  const std::size_t want = band ? 2 : 1;
  if (spec.cutoffs.size() != want)
    throw SpecError("filter: expected " + std::to_string(want) + " cutoff(s), got " +
                    std::to_string(spec.cutoffs.size()));
  for (double c : spec.cutoffs)
    if (!(c > 0.0 && c < fs / 2.0))
      throw SpecError("filter: cutoff " + std::to_string(c) + " Hz outside (0, " + std::to_string(fs / 2.0) +
                      ") Hz");
  if (band && !(spec.cutoffs[0] < spec.cutoffs[1])) throw SpecError("filter: band edges must satisfy low < high");
}

// Analog Butterworth design mapped through the bilinear transform with prewarped edges.
Zpk digital_zpk(const FilterSpec& spec, double fs) {
  const int n = spec.order;
  std::vector<Cplx> proto(n);
  for (int k = 0; k < n; ++k)
    proto[k] = std::polar(1.0, std::numbers::pi * (2.0 * k + n + 1) / (2.0 * n));
  auto warp = [fs](double f) { return 2.0 * fs * std::tan(std::numbers::pi * f / fs); };

  std::vector<Cplx> poles;
  std::vector<Cplx> zeros;  // finite analog zeros; the rest sit at infinity
  switch (spec.kind) {
    case FilterKind::lowpass: {
      const double w = warp(spec.cutoffs[0]);
      for (auto p : proto) poles.push_back(w * p);
      break;
    }
    case FilterKind::highpass: {
      const double w = warp(spec.cutoffs[0]);
      for (auto p : proto) poles.push_back(w / p);
      zeros.assign(n, Cplx(0.0, 0.0));
      break;
    }
    case FilterKind::bandpass:
    case FilterKind::bandstop: {
      const double wl = warp(spec.cutoffs[0]);
      const double wh = warp(spec.cutoffs[1]);
      const double w0 = std::sqrt(wl * wh);
      const double bw = wh - wl;
      for (auto p : proto) {
        const Cplx pb = spec.kind == FilterKind::bandpass ? p * bw / 2.0 : (bw / 2.0) / p;
        const Cplx root = std::sqrt(pb * pb - w0 * w0);
        poles.push_back(pb + root);
        poles.push_back(pb - root);
      }
      if (spec.kind == FilterKind::bandpass) {
        zeros.assign(n, Cplx(0.0, 0.0));
      } else {
        for (int k = 0; k < n; ++k) {
          zeros.emplace_back(0.0, w0);
          zeros.emplace_back(0.0, -w0);
        }
      }
      break;
    }
  }

  Zpk out;
  const double two_fs = 2.0 * fs;
  for (auto p : poles) out.poles.push_back((two_fs + p) / (two_fs - p));
  for (auto z : zeros) out.zeros.push_back((two_fs + z) / (two_fs - z));
  while (out.zeros.size() < out.poles.size()) out.zeros.emplace_back(-1.0, 0.0);
  return out;
}

// Splits roots into conjugate pairs (positive-imaginary member kept) and reals.
void split_roots(const std::vector<Cplx>& roots, std::vector<Cplx>& pairs, std::vector<double>& reals) {
  constexpr double tol = 1e-10;
  for (auto r : roots) {
    if (std::abs(r.imag()) <= tol * std::max(1.0, std::abs(r)))
      reals.push_back(r.real());
    else if (r.imag() > 0)
      pairs.push_back(r);
  }
}

double section_magnitude(const Biquad& s, double omega) {
  const Cplx z1 = std::polar(1.0, -omega);
  const Cplx z2 = z1 * z1;
  const Cplx num = s.b0 + s.b1 * z1 + s.b2 * z2;
  const Cplx den = 1.0 + s.a1 * z1 + s.a2 * z2;
  return std::abs(num / den);
}

double reference_frequency(const FilterSpec& spec, double fs) {
  switch (spec.kind) {
    case FilterKind::lowpass:
    case FilterKind::bandstop:
      return 0.0;
    case FilterKind::highpass:
      return fs / 2.0;
    case FilterKind::bandpass: {
      // Digital frequency that the analog geometric center maps to.
      auto warp = [fs](double f) { return 2.0 * fs * std::tan(std::numbers::pi * f / fs); };
      const double w0 = std::sqrt(warp(spec.cutoffs[0]) * warp(spec.cutoffs[1]));
      return fs / std::numbers::pi * std::atan(w0 / (2.0 * fs));
    }
  }
  return 0.0;
}

}  // namespace

double SosFilter::magnitude(double freq_hz) const {
  const double omega = 2.0 * std::numbers::pi * freq_hz / fs;
  double g = 1.0;
  for (const auto& s : sections) g *= section_magnitude(s, omega);
  return g;
}

double SosFilter::max_pole_radius() const {
  double r = 0.0;
  for (const auto& s : sections) {
    // z^2 + a1 z + a2 = 0
    const Cplx disc = std::sqrt(Cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    r = std::max({r, std::abs((-s.a1 + disc) / 2.0), std::abs((-s.a1 - disc) / 2.0)});
  }
  return r;
}

SosFilter design_filter(const FilterSpec& spec, double fs) {
  validate(spec, fs);
  const Zpk zpk = digital_zpk(spec, fs);

  std::vector<Cplx> pole_pairs, zero_pairs;
  std::vector<double> pole_reals, zero_reals;
  split_roots(zpk.poles, pole_pairs, pole_reals);
  split_roots(zpk.zeros, zero_pairs, zero_reals);
  // Pair opposite real zeros (+1 with -1) so band-pass sections stay well scaled.
  std::sort(zero_reals.begin(), zero_reals.end());

  std::size_t zp = 0, zlo = 0, zhi = zero_reals.size();
  auto take_zero_pair = [&](double& s1, double& s2) {
    // s1 = -(z1 + z2), s2 = z1 z2
    if (zp < zero_pairs.size()) {
      const Cplx z = zero_pairs[zp++];
      s1 = -2.0 * z.real();
      s2 = std::norm(z);
    } else {
      const double z1 = zero_reals[zlo++];
      const double z2 = zero_reals[--zhi];
      s1 = -(z1 + z2);
      s2 = z1 * z2;
    }
  };

  SosFilter f;
  f.fs = fs;
  for (const Cplx p : pole_pairs) {
    Biquad s;
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    take_zero_pair(s.b1, s.b2);
    f.sections.push_back(s);
  }
  for (std::size_t i = 0; i + 1 < pole_reals.size(); i += 2) {
    Biquad s;
    s.a1 = -(pole_reals[i] + pole_reals[i + 1]);
    s.a2 = pole_reals[i] * pole_reals[i + 1];
    take_zero_pair(s.b1, s.b2);
    f.sections.push_back(s);
  }
  if (pole_reals.size() % 2 == 1) {
    Biquad s;
    s.a1 = -pole_reals.back();
    s.b1 = -zero_reals[zlo++];
    f.sections.push_back(s);
  }

  const double omega_ref = 2.0 * std::numbers::pi * reference_frequency(spec, fs) / fs;
  for (auto& s : f.sections) {
    const double g = section_magnitude(s, omega_ref);
    s.b0 /= g;
    s.b1 /= g;
    s.b2 /= g;
  }
  return f;
}

namespace {

std::vector<double> run_sos(const SosFilter& f, std::span<const double> x, bool steady_state) {
  std::vector<double> y(x.begin(), x.end());
  if (y.empty()) return y;
  double level = steady_state ? y.front() : 0.0;
  for (const auto& s : f.sections) {
    // Steady-state response to a constant input `level` (DF-II transposed states).
    const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double out_level = dc * level;
    double z2 = s.b2 * level - s.a2 * out_level;
    double z1 = s.b1 * level - s.a1 * out_level + z2;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    level = out_level;
  }
  return y;
}

}  // namespace

std::vector<double> sos_filter(const SosFilter& f, std::span<const double> x) { return run_sos(f, x, false); }

Segment apply_filter(const Segment& s, const FilterSpec& spec) {
  const SosFilter f = design_filter(spec, s.fs());
  const std::size_t n = s.size();
  if (n <= static_cast<std::size_t>(3 * spec.order))
    throw InvalidInput("apply_filter: segment of " + std::to_string(n) + " samples too short for order " +
                       std::to_string(spec.order));
  if (!spec.zero_phase) return Segment(sos_filter(f, s.view()), s.fs());

  const std::size_t pad = std::min(n - 1, 3 * (2 * f.sections.size() + 1));
  const auto& x = s.samples();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  auto fwd = run_sos(f, ext, true);
  std::reverse(fwd.begin(), fwd.end());
  auto bwd = run_sos(f, fwd, true);
  std::reverse(bwd.begin(), bwd.end());
  return Segment(std::vector<double>(bwd.begin() + static_cast<std::ptrdiff_t>(pad),
                                     bwd.begin() + static_cast<std::ptrdiff_t>(pad + n)),
                 s.fs());
}

}  // namespace eegbench
