#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eegbench/errors.hpp"

namespace eegbench {

// A single-channel, fixed-rate time series. Samples are finite and non-empty.
class Segment {
 public:
  Segment(std::vector<double> samples, int fs);

  const std::vector<double>& samples() const noexcept { return samples_; }
  std::span<const double> view() const noexcept { return samples_; }
  int fs() const noexcept { return fs_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double operator[](std::size_t i) const noexcept { return samples_[i]; }

  Segment scaled(double factor) const;

 private:
  std::vector<double> samples_;
  int fs_;
};

struct MixParams {
  double lambda = 0.0;
  double snr_db = 0.0;
};

struct NormalizationRecord {
  double sigma_y = 1.0;
};

struct NormalizedPair {
  Segment x_hat;
  Segment y_hat;
  NormalizationRecord record;
};

double rms(std::span<const double> s);
inline double rms(const Segment& s) { return rms(s.view()); }

double mean(std::span<const double> s);
// Population (divide-by-N) standard deviation.
double population_std(std::span<const double> s);

// Scale factor that puts n at `snr_db` below x under the RMS-ratio convention
// snr = 10 log10(rms(x) / rms(lambda * n)).
double lambda_for_snr(const Segment& x, const Segment& n, double snr_db);
Segment mix(const Segment& x, const Segment& n, double lambda);
double snr_of(const Segment& x, const Segment& scaled_noise);

Segment standardize(const Segment& s);
NormalizedPair normalize_pair(const Segment& x, const Segment& y);
Segment denormalize(const Segment& s, const NormalizationRecord& rec);

}  // namespace eegbench
