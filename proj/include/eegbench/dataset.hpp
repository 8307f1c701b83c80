#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eegbench/npy.hpp"
#include "eegbench/signal.hpp"

namespace eegbench {

enum class BankKind { EEG, EOG, EMG };
enum class ArtifactType { ocular, myogenic };

std::string to_string(BankKind k);
std::string to_string(ArtifactType a);
ArtifactType parse_artifact_type(const std::string& s);

// Rows are segments, columns temporal samples, all at one sampling rate.
struct SegmentBank {
  BankKind kind = BankKind::EEG;
  Matrix matrix;
  int fs = 0;

  std::size_t count() const { return matrix.rows; }
  std::size_t length() const { return matrix.cols; }
  Segment segment(std::size_t row) const;

  // Finite values, positive rate, non-empty.
  void validate() const;
  // Shape of the published files: EEG/EOG 512 @ 256 Hz, EMG 1024 @ 512 Hz.
  void validate_published_layout() const;
};

// Every row resampled to fs_to.
SegmentBank resample_bank(const SegmentBank& b, int fs_to);

SegmentBank load_bank(const std::filesystem::path& path, BankKind kind);

// File names of the published segment matrices inside a dataset root.
std::filesystem::path published_file(const std::filesystem::path& root, BankKind kind);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Seeded shuffle of 0..n-1; val/test sizes are floor(n * ratio), the remainder goes to train.
SplitIndices split(std::size_t n, const SplitRatios& ratios, std::uint64_t seed);

struct SemiSyntheticPair {
  Segment ground_truth;
  Segment contaminated;
  double lambda = 0;
  double snr_db = 0;
  double sigma_y = 1;
  std::size_t eeg_index = 0;       // row in the EEG bank
  std::size_t artifact_index = 0;  // row in the artifact bank
};

std::vector<double> default_snr_levels();      // -7 ... +2 dB
std::vector<double> extended_myogenic_levels();  // -7 ... +4 dB

struct GenerationConfig {
  ArtifactType artifact_type = ArtifactType::ocular;
  std::vector<double> snr_levels = default_snr_levels();
  std::uint64_t seed = 0;
  SplitRatios ratios;
  // Draw a fresh artifact partner for every SNR level instead of one per base pair.
  bool repair_per_level = false;
};

struct SemiSyntheticSets {
  std::vector<SemiSyntheticPair> train, val, test;
  SplitIndices eeg_split;       // EEG rows per split (before reuse)
  SplitIndices artifact_split;  // artifact rows per split
};

SemiSyntheticSets generate_semisynthetic(const SegmentBank& eeg, const SegmentBank& art, const GenerationConfig& cfg);

// Dataset-free stand-ins for the published banks. Rows are standardized.
SegmentBank synth_surrogate(BankKind kind, std::size_t count, std::uint64_t seed, int fs, std::size_t length);
// Native layout: EEG/EOG 512 @ 256 Hz, EMG 1024 @ 512 Hz.
SegmentBank synth_surrogate(BankKind kind, std::size_t count, std::uint64_t seed);

// On-disk form: <split>_ground_truth.npy, <split>_contaminated.npy, <split>_meta.npy
// (columns snr_db, lambda, sigma_y, eeg_index, artifact_index) and manifest.json.
void write_sets(const std::filesystem::path& dir, const SemiSyntheticSets& sets, const GenerationConfig& cfg, int fs);
struct LoadedSets {
  SemiSyntheticSets sets;
  GenerationConfig cfg;
  int fs = 0;
};
LoadedSets read_sets(const std::filesystem::path& dir);

}  // namespace eegbench
