#pragma once

#include <vector>

#include "eegbench/signal.hpp"

namespace eegbench {

enum class FilterKind { lowpass, highpass, bandpass, bandstop };

struct FilterSpec {
  FilterKind kind = FilterKind::lowpass;
  std::vector<double> cutoffs;  // Hz; one edge for low/high-pass, two for band filters
  int order = 4;                // prototype order; band filters get 2*order poles
  bool zero_phase = true;
};

// One biquad, a0 normalized to 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

// Butterworth response realized as cascaded second-order sections.
struct SosFilter {
  std::vector<Biquad> sections;
  double fs = 0;

  // Complex gain magnitude at `freq_hz`.
  double magnitude(double freq_hz) const;
  // Largest pole radius over all sections.
  double max_pole_radius() const;
};

SosFilter design_filter(const FilterSpec& spec, double fs);

// Causal single pass (direct form II transposed, zero initial state).
std::vector<double> sos_filter(const SosFilter& f, std::span<const double> x);

// Filters with `spec`; zero_phase runs forward-backward with odd-reflection padding and
// steady-state initial conditions.
Segment apply_filter(const Segment& s, const FilterSpec& spec);

}  // namespace eegbench
