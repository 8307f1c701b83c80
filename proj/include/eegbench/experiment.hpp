#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eegbench/dataset.hpp"
#include "eegbench/metrics.hpp"
#include "eegbench/models.hpp"
#include "eegbench/train.hpp"

namespace eegbench {

enum class Scale { desk, paper };
std::string to_string(Scale s);
Scale parse_scale(const std::string& s);

// Everything that differs between the quick preset and the full protocol.
struct ScalePreset {
  int eeg_fs = 256;
  std::size_t eeg_len = 512;
  int artifact_fs = 256;
  std::size_t artifact_len = 512;
  // Surrogate rows per bank, or rows subsampled from a loaded bank; 0 keeps every row.
  std::size_t base_pairs = 0;
  std::size_t feature_maps = 64;
  std::size_t branch_width = 32;
  std::size_t hidden_size = 1;
  std::size_t batch_size = 64;
  std::map<Architecture, std::size_t> epochs;
};
ScalePreset preset_for(Scale scale, ArtifactType artifact);

// A method is either one of the networks or a training-free baseline.
enum class BaselineKind { filter, emd, identity };
struct MethodId {
  std::string name;
  std::optional<Architecture> architecture;
  std::optional<BaselineKind> baseline;
};
MethodId parse_method(const std::string& name);

struct ExperimentConfig {
  ArtifactType artifact_type = ArtifactType::ocular;
  std::vector<std::string> methods = {"fcnn", "simple_cnn", "complex_cnn", "rnn", "filter", "emd"};
  Scale scale = Scale::desk;
  std::vector<std::uint64_t> seeds = {0};
  std::map<std::string, std::size_t> epochs;  // per-method overrides
  std::vector<double> snr_levels;             // empty: -7 ... +2 dB for both artifact types
  std::filesystem::path dataset_root;         // empty: use the environment variable
  bool surrogate = false;
  std::uint64_t surrogate_seed = 2021;        // fixes the stand-in banks across repetitions
  std::filesystem::path out = "results";
  std::size_t workers = 0;                    // 0: hardware concurrency
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> base_pairs;
  std::optional<std::size_t> feature_maps;
  std::optional<std::size_t> branch_width;
  std::optional<std::size_t> hidden_size;
  double dropout = 0.2;
  bool repair_per_level = false;

  void validate() const;
  std::vector<double> levels() const;
  ScalePreset preset() const;  // preset with the overrides applied
  std::size_t epochs_for(const MethodId& m) const;
  ModelSpec model_spec(Architecture arch, std::uint64_t seed) const;
};

inline constexpr const char* kDataRootEnv = "EEGBENCH_DATA_ROOT";

// Reads a JSON config; unknown keys are rejected with SpecError.
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_json(const ExperimentConfig& cfg);

struct Banks {
  SegmentBank eeg;
  SegmentBank artifact;
};
// Surrogate banks, or the published files from the dataset root.
Banks load_banks(const ExperimentConfig& cfg);

SemiSyntheticSets make_sets(const ExperimentConfig& cfg, const Banks& banks, std::uint64_t seed);

// Writes the sets for the first seed plus their manifest.
std::filesystem::path cmd_generate(const ExperimentConfig& cfg);

struct RunResult {
  std::string method;
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  bool ok = false;
  std::string error;
  EvalReport report;
  TrainRecord record;  // empty for baselines
  std::string started, finished;
  double seconds = 0;
};

// Trains (networks only) and evaluates one method on the sets of one seed, writing into dir.
RunResult run_one(const ExperimentConfig& cfg, const Banks& banks, const MethodId& method, std::uint64_t seed,
                  const std::filesystem::path& dir);

struct BenchmarkSummary {
  std::vector<RunResult> runs;
  std::size_t failed = 0;
};
// Every (method, seed) job over a bounded worker pool, then the aggregate tables.
BenchmarkSummary cmd_benchmark(const ExperimentConfig& cfg);

// Plot-ready series derived from a benchmark directory, written to <results>/report.
std::filesystem::path cmd_report(const std::filesystem::path& results_dir, bool svg = true);

}  // namespace eegbench
