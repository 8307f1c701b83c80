#include "eegbench/signal.hpp"

#include <cmath>
#include <string>

namespace eegbench {

Segment::Segment(std::vector<double> samples, int fs) : samples_(std::move(samples)), fs_(fs) {
  if (samples_.empty()) throw InvalidInput("segment: empty sample vector");
  if (fs_ <= 0) throw InvalidInput("segment: sampling rate must be positive, got " + std::to_string(fs_));
  for (double v : samples_)
    if (!std::isfinite(v)) throw InvalidInput("segment: non-finite sample");
}

Segment Segment::scaled(double factor) const {
  std::vector<double> out(samples_);
  for (double& v : out) v *= factor;
  return Segment(std::move(out), fs_);
}

double rms(std::span<const double> s) {
  if (s.empty()) throw InvalidInput("rms: empty segment");
  double acc = 0.0;
  for (double v : s) acc += v * v;
  return std::sqrt(acc / static_cast<double>(s.size()));
}

double mean(std::span<const double> s) {
  if (s.empty()) throw InvalidInput("mean: empty segment");
  double acc = 0.0;
  for (double v : s) acc += v;
  return acc / static_cast<double>(s.size());
}

double population_std(std::span<const double> s) {
  const double m = mean(s);
  double acc = 0.0;
  for (double v : s) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(s.size()));
}

double lambda_for_snr(const Segment& x, const Segment& n, double snr_db) {
  if (!std::isfinite(snr_db)) throw InvalidInput("lambda_for_snr: non-finite target SNR");
  const double rx = rms(x);
  const double rn = rms(n);
  if (rx == 0.0 || rn == 0.0) throw DegenerateSignal("lambda_for_snr: zero-RMS input");
  return rx / (rn * std::pow(10.0, snr_db / 10.0));
}

Segment mix(const Segment& x, const Segment& n, double lambda) {
  if (x.size() != n.size() || x.fs() != n.fs())
    throw ShapeError("mix: x has " + std::to_string(x.size()) + " samples @" + std::to_string(x.fs()) +
                     " Hz, n has " + std::to_string(n.size()) + " @" + std::to_string(n.fs()) + " Hz");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidInput("mix: lambda must be finite and >= 0");
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + lambda * n[i];
  return Segment(std::move(y), x.fs());
}

double snr_of(const Segment& x, const Segment& scaled_noise) {
  const double rx = rms(x);
  const double rn = rms(scaled_noise);
  if (rx == 0.0 || rn == 0.0) throw DegenerateSignal("snr_of: zero-RMS input");
  return 10.0 * std::log10(rx / rn);
}

Segment standardize(const Segment& s) {
  const double m = mean(s.view());
  const double sd = population_std(s.view());
  if (sd == 0.0) throw DegenerateSignal("standardize: constant segment");
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (s[i] - m) / sd;
  return Segment(std::move(out), s.fs());
}

NormalizedPair normalize_pair(const Segment& x, const Segment& y) {
  if (x.size() != y.size()) throw ShapeError("normalize_pair: length mismatch");
  const double sigma = population_std(y.view());
  if (sigma == 0.0) throw DegenerateSignal("normalize_pair: contaminated segment has zero variance");
  return {x.scaled(1.0 / sigma), y.scaled(1.0 / sigma), NormalizationRecord{sigma}};
}

Segment denormalize(const Segment& s, const NormalizationRecord& rec) {
  if (!(rec.sigma_y > 0.0)) throw InvalidInput("denormalize: sigma_y must be positive");
  return s.scaled(rec.sigma_y);
}

}  // namespace eegbench
