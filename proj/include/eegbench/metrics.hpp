#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "eegbench/dataset.hpp"
#include "eegbench/dsp.hpp"

namespace eegbench {

// RMS(denoised - truth) / RMS(truth).
double rrmse_temporal(const Segment& denoised, const Segment& truth);
// Same ratio on periodograms, restricted to 0-120 Hz when fs >= 240.
double rrmse_spectral(const Segment& denoised, const Segment& truth);
// Pearson correlation with population moments.
double cc(const Segment& denoised, const Segment& truth);

struct PairMetrics {
  std::size_t pair_index = 0;
  double snr_db = 0;
  double rrmse_t = 0;
  double rrmse_s = 0;
  double cc = 0;
  bool ok = true;
  std::string error;
};

// Per-level summary over the successful pairs; std is the population form.
struct LevelSummary {
  double snr_db = 0;
  std::size_t count = 0;
  std::size_t failed = 0;
  double mean_rrmse_t = 0, std_rrmse_t = 0;
  double mean_rrmse_s = 0, std_rrmse_s = 0;
  double mean_cc = 0, std_cc = 0;
};

// Mean band-power ratios of the ground truth, contaminated and denoised segments.
struct BandTable {
  bool available = false;  // needs fs >= 160
  std::size_t count = 0;
  BandPowerRatios ground_truth, contaminated, denoised;
};

struct EvalReport {
  std::string method;
  std::vector<PairMetrics> pairs;   // in test-set order
  std::vector<LevelSummary> levels; // ascending SNR
  BandTable bands;

  std::size_t failed() const;
};

using Denoiser = std::function<Segment(const Segment&)>;

// Scores precomputed outputs (one per pair, same order).
EvalReport evaluate_outputs(const std::string& method, const std::vector<SemiSyntheticPair>& pairs,
                            const std::vector<Segment>& outputs);
// Runs the denoiser on each contaminated segment; a throwing pair is marked failed.
EvalReport evaluate(const std::string& method, const Denoiser& denoiser, const std::vector<SemiSyntheticPair>& pairs);

// Recomputes the per-level summaries from the pair records.
std::vector<LevelSummary> summarize_levels(const std::vector<PairMetrics>& pairs);

// (best, worst) pair indices by rrmse_t; ties go to the lower index.
std::pair<std::size_t, std::size_t> best_worst(const EvalReport& report);

// method,seed,snr_db,pair_index,rrmse_t,rrmse_s,cc; failed pairs carry nan metrics.
void write_eval_csv(const std::filesystem::path& path, const EvalReport& report, std::uint64_t seed);
// Reads the rows back; rows with nan metrics come back as failed.
std::vector<PairMetrics> read_eval_csv(const std::filesystem::path& path);
// Level summaries, failure count and band table.
void write_eval_json(const std::filesystem::path& path, const EvalReport& report);

}  // namespace eegbench
