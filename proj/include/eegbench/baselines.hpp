#pragma once

#include "eegbench/dataset.hpp"
#include "eegbench/emd.hpp"
#include "eegbench/filter.hpp"

namespace eegbench {

// Power-weighted mean frequency of the one-sided periodogram; 0 for an all-zero signal.
double spectral_centroid(const Segment& s);

// Optimal split of sorted 1-D values into two clusters by within-cluster squared error.
// Returns a label per input value: 0 for the lower cluster, 1 for the upper one.
std::vector<int> two_means_1d(std::span<const double> values);

struct EmdDenoiseResult {
  Segment signal;
  bool passthrough = false;  // decomposition failed; the input is returned unchanged
  std::size_t components = 0;
  std::size_t removed = 0;
};

// Decomposes, clusters the IMFs plus residual on spectral centroid, drops the low cluster
// for ocular and the high cluster for myogenic artifacts, and sums the rest. Components with
// negligible energy are not clustered, and nothing is removed unless two remain to separate.
EmdDenoiseResult emd_denoise(const Segment& s, ArtifactType artifact, const EmdConfig& cfg = {});

// Ocular: 12 Hz high-pass. Myogenic: 12-40 Hz band-pass. Fourth order, zero phase.
FilterSpec baseline_filter_spec(ArtifactType artifact);
Segment filter_denoise(const Segment& s, ArtifactType artifact);

}  // namespace eegbench
