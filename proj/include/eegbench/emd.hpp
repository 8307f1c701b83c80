#pragma once

#include <vector>

#include "eegbench/signal.hpp"

namespace eegbench {

struct EmdConfig {
  std::size_t max_imfs = 10;
  double sd_threshold = 0.2;      // sum of squared mean envelope over sum of squared candidate
  std::size_t max_sifts = 100;

  void validate() const;
};

// Fastest oscillation first; imfs + residual reproduce the input up to rounding.
struct ImfSet {
  std::vector<Segment> imfs;
  Segment residual;
};

struct ExtremaCount {
  std::size_t maxima = 0;
  std::size_t minima = 0;
  std::size_t zero_crossings = 0;
};
ExtremaCount count_extrema(std::span<const double> x);

// Natural cubic spline through (xs, ys) evaluated at 0, 1, ..., n-1. xs strictly ascending.
std::vector<double> natural_spline(std::span<const double> xs, std::span<const double> ys, std::size_t n);

// Sifting with cubic-spline envelopes through mirrored extrema. Throws DecompositionError
// when the input has fewer than four extrema.
ImfSet emd(const Segment& s, const EmdConfig& cfg = {});

}  // namespace eegbench
