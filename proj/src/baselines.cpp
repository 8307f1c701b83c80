#include "eegbench/baselines.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "eegbench/dsp.hpp"

namespace eegbench {

double spectral_centroid(const Segment& s) {
  const PsdEstimate p = psd(s);
  double num = 0, den = 0;
  for (std::size_t k = 0; k < p.power.size(); ++k) {
    num += p.freqs[k] * p.power[k];
    den += p.power[k];
  }
  return den > 0 ? num / den : 0.0;
}

std::vector<int> two_means_1d(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<int> labels(n, 0);
  if (n < 2) return labels;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  auto sse = [&](std::size_t lo, std::size_t hi) {
    double m = 0;
    for (std::size_t i = lo; i < hi; ++i) m += values[order[i]];
    m /= static_cast<double>(hi - lo);
    double e = 0;
    for (std::size_t i = lo; i < hi; ++i) e += (values[order[i]] - m) * (values[order[i]] - m);
    return e;
  };
  std::size_t best_k = 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < n; ++k) {
    const double e = sse(0, k) + sse(k, n);
    if (e < best) {
      best = e;
      best_k = k;
    }
  }
  for (std::size_t i = best_k; i < n; ++i) labels[order[i]] = 1;
  return labels;
}

namespace {

constexpr double kNegligibleEnergy = 1e-12;

}  // namespace

EmdDenoiseResult emd_denoise(const Segment& s, ArtifactType artifact, const EmdConfig& cfg) {
  ImfSet set{{}, s};
  try {
    set = emd(s, cfg);
  } catch (const DecompositionError&) {
    return {s, true, 0, 0};
  }
  std::vector<Segment> comps = set.imfs;
  comps.push_back(set.residual);
  // Components at round-off level have no meaningful centroid; they are kept but not clustered.
  double total = 0;
  for (double v : s.samples()) total += v * v;
  std::vector<std::size_t> scored;
  std::vector<double> centroids;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    double e = 0;
    for (double v : comps[i].samples()) e += v * v;
    if (e <= kNegligibleEnergy * total) continue;
    scored.push_back(i);
    centroids.push_back(spectral_centroid(comps[i]));
  }
  std::vector<bool> dropped(comps.size(), false);
  if (scored.size() >= 2) {
    const std::vector<int> labels = two_means_1d(centroids);
    const int drop = artifact == ArtifactType::ocular ? 0 : 1;
    for (std::size_t k = 0; k < scored.size(); ++k) dropped[scored[k]] = labels[k] == drop;
  }
  std::vector<double> out(s.size(), 0.0);
  std::size_t removed = 0;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (dropped[i]) {
      ++removed;
      continue;
    }
    for (std::size_t t = 0; t < out.size(); ++t) out[t] += comps[i][t];
  }
  return {Segment(std::move(out), s.fs()), false, comps.size(), removed};
}

FilterSpec baseline_filter_spec(ArtifactType artifact) {
  if (artifact == ArtifactType::ocular) return {FilterKind::highpass, {12.0}, 4, true};
  return {FilterKind::bandpass, {12.0, 40.0}, 4, true};
}

Segment filter_denoise(const Segment& s, ArtifactType artifact) {
  return apply_filter(s, baseline_filter_spec(artifact));
}

}  // namespace eegbench
