#include "eegbench/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "eegbench/baselines.hpp"
#include "eegbench/checkpoint.hpp"
#include "eegbench/csv.hpp"
#include "eegbench/dsp.hpp"
#include "eegbench/stats.hpp"

#ifndef EEGBENCH_VERSION
#define EEGBENCH_VERSION "unknown"
#endif

namespace eegbench {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string to_string(Scale s) { return s == Scale::desk ? "desk" : "paper"; }

Scale parse_scale(const std::string& s) {
  if (s == "desk") return Scale::desk;
  if (s == "paper") return Scale::paper;
  throw SpecError("unknown scale '" + s + "' (expected desk|paper)");
}

ScalePreset preset_for(Scale scale, ArtifactType artifact) {
  ScalePreset p;
  if (scale == Scale::paper) {
    p.eeg_fs = 256;
    p.eeg_len = 512;
    p.artifact_fs = artifact == ArtifactType::ocular ? 256 : 512;
    p.artifact_len = artifact == ArtifactType::ocular ? 512 : 1024;
    p.base_pairs = 0;
    p.feature_maps = 64;
    p.branch_width = 32;
    p.batch_size = 64;
    for (auto a : {Architecture::FCNN, Architecture::SimpleCNN, Architecture::ComplexCNN, Architecture::RNN})
      p.epochs[a] = default_epochs(a, artifact);
    return p;
  }
  // Native rates divided by four, one-second segments.
  p.eeg_fs = 64;
  p.eeg_len = 64;
  p.artifact_fs = artifact == ArtifactType::ocular ? 64 : 128;
  p.artifact_len = artifact == ArtifactType::ocular ? 64 : 128;
  p.base_pairs = 100;
  p.feature_maps = 8;
  p.branch_width = 4;
  p.batch_size = 8;
  p.epochs = {{Architecture::FCNN, 30},
              {Architecture::SimpleCNN, 20},
              {Architecture::ComplexCNN, 10},
              {Architecture::RNN, 10}};
  return p;
}

MethodId parse_method(const std::string& name) {
  if (name == "filter") return {name, std::nullopt, BaselineKind::filter};
  if (name == "emd") return {name, std::nullopt, BaselineKind::emd};
  if (name == "identity") return {name, std::nullopt, BaselineKind::identity};
  try {
    return {name, parse_architecture(name), std::nullopt};
  } catch (const SpecError&) {
    throw SpecError("unknown method '" + name +
                    "' (expected fcnn|simple_cnn|complex_cnn|rnn|filter|emd|identity)");
  }
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw SpecError("config: at least one method is required");
  if (seeds.empty()) throw SpecError("config: at least one seed is required");
  std::set<std::string> seen;
  for (const auto& m : methods) {
    const MethodId id = parse_method(m);
    if (!seen.insert(id.name).second) throw SpecError("config: method '" + m + "' listed twice");
  }
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw SpecError("config: seeds must be distinct");
  for (const auto& [m, e] : epochs) {
    parse_method(m);
    if (e < 1) throw SpecError("config: epochs for '" + m + "' must be >= 1");
  }
  if (!(dropout >= 0 && dropout < 1)) throw SpecError("config: dropout must lie in [0, 1)");
  if (batch_size && *batch_size < 1) throw SpecError("config: batch_size must be >= 1");
  if (base_pairs && *base_pairs < 10) throw SpecError("config: base_pairs must be >= 10");
  for (auto w : {feature_maps, branch_width, hidden_size})
    if (w && *w < 1) throw SpecError("config: widths must be >= 1");
  if (levels().empty()) throw SpecError("config: snr_levels is empty");
}

std::vector<double> ExperimentConfig::levels() const {
  return snr_levels.empty() ? default_snr_levels() : snr_levels;
}

ScalePreset ExperimentConfig::preset() const {
  ScalePreset p = preset_for(scale, artifact_type);
  if (batch_size) p.batch_size = *batch_size;
  if (base_pairs) p.base_pairs = *base_pairs;
  if (feature_maps) p.feature_maps = *feature_maps;
  if (branch_width) p.branch_width = *branch_width;
  if (hidden_size) p.hidden_size = *hidden_size;
  return p;
}

std::size_t ExperimentConfig::epochs_for(const MethodId& m) const {
  if (auto it = epochs.find(m.name); it != epochs.end()) return it->second;
  if (!m.architecture) return 0;
  return preset().epochs.at(*m.architecture);
}

ModelSpec ExperimentConfig::model_spec(Architecture arch, std::uint64_t seed) const {
  const ScalePreset p = preset();
  ModelSpec s;
  s.architecture = arch;
  s.input_len = p.artifact_len;
  s.feature_maps = p.feature_maps;
  s.branch_width = p.branch_width;
  s.hidden_size = p.hidden_size;
  s.dropout = dropout;
  s.init_seed = CounterRng::finalize(seed * 8 + static_cast<std::uint64_t>(arch) + 1);
  return s;
}

namespace {

template <class T>
T get_field(const nlohmann::json& j, const char* key, const fs::path& path) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(path.string() + ": field '" + key + "': " + e.what());
  }
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::mutex log_mutex;

void log_line(const std::string& s) {
  std::lock_guard lock(log_mutex);
  std::cerr << s << std::endl;
}

}  // namespace

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(path.string() + ": cannot open config");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw SpecError(path.string() + ": config must be a JSON object");
  static const std::set<std::string> known = {
      "artifact",   "methods",      "scale",        "seeds",       "epochs",       "snr_levels",
      "dataset_root", "surrogate",  "surrogate_seed", "out",       "workers",      "batch_size",
      "base_pairs", "feature_maps", "branch_width", "hidden_size", "dropout",      "repair_per_level"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw SpecError(path.string() + ": unknown field '" + k + "'");
  ExperimentConfig c;
  if (j.contains("artifact")) c.artifact_type = parse_artifact_type(get_field<std::string>(j, "artifact", path));
  if (j.contains("methods")) c.methods = get_field<std::vector<std::string>>(j, "methods", path);
  if (j.contains("scale")) c.scale = parse_scale(get_field<std::string>(j, "scale", path));
  if (j.contains("seeds")) c.seeds = get_field<std::vector<std::uint64_t>>(j, "seeds", path);
  if (j.contains("epochs")) c.epochs = get_field<std::map<std::string, std::size_t>>(j, "epochs", path);
  if (j.contains("snr_levels")) c.snr_levels = get_field<std::vector<double>>(j, "snr_levels", path);
  if (j.contains("dataset_root")) c.dataset_root = get_field<std::string>(j, "dataset_root", path);
  if (j.contains("surrogate")) c.surrogate = get_field<bool>(j, "surrogate", path);
  if (j.contains("surrogate_seed")) c.surrogate_seed = get_field<std::uint64_t>(j, "surrogate_seed", path);
  if (j.contains("out")) c.out = get_field<std::string>(j, "out", path);
  if (j.contains("workers")) c.workers = get_field<std::size_t>(j, "workers", path);
  if (j.contains("batch_size")) c.batch_size = get_field<std::size_t>(j, "batch_size", path);
  if (j.contains("base_pairs")) c.base_pairs = get_field<std::size_t>(j, "base_pairs", path);
  if (j.contains("feature_maps")) c.feature_maps = get_field<std::size_t>(j, "feature_maps", path);
  if (j.contains("branch_width")) c.branch_width = get_field<std::size_t>(j, "branch_width", path);
  if (j.contains("hidden_size")) c.hidden_size = get_field<std::size_t>(j, "hidden_size", path);
  if (j.contains("dropout")) c.dropout = get_field<double>(j, "dropout", path);
  if (j.contains("repair_per_level")) c.repair_per_level = get_field<bool>(j, "repair_per_level", path);
  return c;
}

std::string config_json(const ExperimentConfig& c) {
  ordered_json j;
  j["artifact"] = to_string(c.artifact_type);
  j["methods"] = c.methods;
  j["scale"] = to_string(c.scale);
  j["seeds"] = c.seeds;
  j["epochs"] = c.epochs;
  j["snr_levels"] = c.levels();
  j["dataset_root"] = c.dataset_root.string();
  j["surrogate"] = c.surrogate;
  j["surrogate_seed"] = c.surrogate_seed;
  j["out"] = c.out.string();
  j["workers"] = c.workers;
  const ScalePreset p = c.preset();
  j["batch_size"] = p.batch_size;
  j["base_pairs"] = p.base_pairs;
  j["feature_maps"] = p.feature_maps;
  j["branch_width"] = p.branch_width;
  j["hidden_size"] = p.hidden_size;
  j["dropout"] = c.dropout;
  j["repair_per_level"] = c.repair_per_level;
  return j.dump(2);
}

Banks load_banks(const ExperimentConfig& cfg) {
  const ScalePreset p = cfg.preset();
  const BankKind art_kind = cfg.artifact_type == ArtifactType::ocular ? BankKind::EOG : BankKind::EMG;
  Banks b;
  if (cfg.surrogate) {
    const std::size_t n = p.base_pairs > 0 ? p.base_pairs
                          : cfg.artifact_type == ArtifactType::ocular ? 3400
                                                                       : 5598;
    const std::size_t n_eeg = p.base_pairs > 0 ? p.base_pairs : 4514;
    b.eeg = synth_surrogate(BankKind::EEG, n_eeg, cfg.surrogate_seed, p.eeg_fs, p.eeg_len);
    b.artifact = synth_surrogate(art_kind, n, cfg.surrogate_seed, p.artifact_fs, p.artifact_len);
  } else {
    fs::path root = cfg.dataset_root;
    if (root.empty())
      if (const char* env = std::getenv(kDataRootEnv)) root = env;
    const fs::path eeg_file = published_file(root, BankKind::EEG), art_file = published_file(root, art_kind);
    if (root.empty() || !fs::exists(eeg_file) || !fs::exists(art_file))
      throw SpecError("dataset not found: expected " + eeg_file.filename().string() + " and " +
                      art_file.filename().string() + " under " + (root.empty() ? "<unset>" : root.string()) +
                      "; set " + kDataRootEnv + " or dataset_root, or pass --surrogate");
    b.eeg = load_bank(eeg_file, BankKind::EEG);
    b.artifact = load_bank(art_file, art_kind);
    b.eeg.validate_published_layout();
    b.artifact.validate_published_layout();
    if (p.base_pairs > 0) {
      // Seeded row subsample keeps the native layout at reduced count.
      auto subsample = [&](SegmentBank& bank, std::uint64_t stream) {
        if (bank.count() <= p.base_pairs) return;
        CounterRng rng(cfg.surrogate_seed, stream);
        const auto perm = permutation(bank.count(), rng);
        Matrix m(p.base_pairs, bank.length());
        for (std::size_t r = 0; r < p.base_pairs; ++r) {
          const auto src = bank.matrix.row(perm[r]);
          std::copy(src.begin(), src.end(), m.row(r).begin());
        }
        bank.matrix = std::move(m);
      };
      subsample(b.eeg, 0xD0);
      subsample(b.artifact, 0xD1);
    }
    // Reduced presets take the leading part of each resampled row.
    auto conform = [](SegmentBank& bank, int fs, std::size_t len) {
      if (bank.fs != fs) bank = resample_bank(bank, fs);
      if (bank.length() < len)
        throw SpecError(to_string(bank.kind) + " rows hold " + std::to_string(bank.length()) +
                        " samples at the preset rate, preset needs " + std::to_string(len));
      if (bank.length() == len) return;
      Matrix m(bank.count(), len);
      for (std::size_t r = 0; r < bank.count(); ++r) {
        const auto src = bank.matrix.row(r);
        std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(len), m.row(r).begin());
      }
      bank.matrix = std::move(m);
    };
    conform(b.eeg, p.eeg_fs, p.eeg_len);
    conform(b.artifact, p.artifact_fs, p.artifact_len);
  }
  if (b.eeg.fs != b.artifact.fs) b.eeg = resample_bank(b.eeg, b.artifact.fs);
  return b;
}

SemiSyntheticSets make_sets(const ExperimentConfig& cfg, const Banks& banks, std::uint64_t seed) {
  GenerationConfig g;
  g.artifact_type = cfg.artifact_type;
  g.snr_levels = cfg.levels();
  g.seed = seed;
  g.repair_per_level = cfg.repair_per_level;
  return generate_semisynthetic(banks.eeg, banks.artifact, g);
}

fs::path cmd_generate(const ExperimentConfig& cfg) {
  cfg.validate();
  const Banks banks = load_banks(cfg);
  const std::uint64_t seed = cfg.seeds.front();
  const SemiSyntheticSets sets = make_sets(cfg, banks, seed);
  GenerationConfig g;
  g.artifact_type = cfg.artifact_type;
  g.snr_levels = cfg.levels();
  g.seed = seed;
  g.repair_per_level = cfg.repair_per_level;
  write_sets(cfg.out, sets, g, banks.artifact.fs);
  return cfg.out;
}

namespace {

void write_examples(const fs::path& dir, const std::vector<SemiSyntheticPair>& pairs,
                    const std::vector<Segment>& outputs, const EvalReport& report) {
  const auto [best, worst] = best_worst(report);
  const int fs_hz = pairs[best].ground_truth.fs();
  {
    std::ofstream o(dir / "examples.csv");
    o << "sample,time_s,best_ground_truth,best_contaminated,best_denoised,worst_ground_truth,worst_contaminated,"
         "worst_denoised\n";
    for (std::size_t t = 0; t < pairs[best].ground_truth.size(); ++t)
      o << t << ',' << format_real(static_cast<double>(t) / fs_hz) << ',' << format_real(pairs[best].ground_truth[t])
        << ',' << format_real(pairs[best].contaminated[t]) << ',' << format_real(outputs[best][t]) << ','
        << format_real(pairs[worst].ground_truth[t]) << ',' << format_real(pairs[worst].contaminated[t]) << ','
        << format_real(outputs[worst][t]) << '\n';
  }
  const PsdEstimate pg = psd(pairs[best].ground_truth), pc = psd(pairs[best].contaminated), pd = psd(outputs[best]);
  const PsdEstimate wg = psd(pairs[worst].ground_truth), wc = psd(pairs[worst].contaminated), wd = psd(outputs[worst]);
  std::ofstream o(dir / "examples_psd.csv");
  o << "freq_hz,best_ground_truth,best_contaminated,best_denoised,worst_ground_truth,worst_contaminated,"
       "worst_denoised\n";
  for (std::size_t k = 0; k < pg.freqs.size(); ++k)
    o << format_real(pg.freqs[k]) << ',' << format_real(pg.power[k]) << ',' << format_real(pc.power[k]) << ','
      << format_real(pd.power[k]) << ',' << format_real(wg.power[k]) << ',' << format_real(wc.power[k]) << ','
      << format_real(wd.power[k]) << '\n';
  std::ofstream(dir / "best_worst.json") << ordered_json{{"best", best},
                                                          {"worst", worst},
                                                          {"best_snr_db", pairs[best].snr_db},
                                                          {"worst_snr_db", pairs[worst].snr_db}}
                                                .dump(2)
                                         << '\n';
}

}  // namespace

RunResult run_one(const ExperimentConfig& cfg, const Banks& banks, const MethodId& method, std::uint64_t seed,
                  const fs::path& dir) {
  RunResult r;
  r.method = method.name;
  r.seed = seed;
  r.dir = dir;
  r.started = timestamp();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fs::create_directories(dir);
    const SemiSyntheticSets sets = make_sets(cfg, banks, seed);
    std::vector<Segment> outputs;
    if (method.architecture) {
      auto model = build_model(cfg.model_spec(*method.architecture, seed));
      TrainConfig tc;
      tc.epochs = cfg.epochs_for(method);
      tc.batch_size = cfg.preset().batch_size;
      tc.seed = CounterRng::finalize(seed ^ 0x7EA1);
      r.record = train(*model, sets.train, sets.val, tc);
      write_loss_csv(dir / "loss.csv", r.record);
      save_checkpoint(dir / "checkpoint", *model);
      std::vector<Segment> inputs;
      for (const auto& p : sets.test) inputs.push_back(p.contaminated);
      outputs = denoise_batch(*model, inputs, tc.batch_size);
    } else {
      for (const auto& p : sets.test) {
        switch (*method.baseline) {
          case BaselineKind::filter: outputs.push_back(filter_denoise(p.contaminated, cfg.artifact_type)); break;
          case BaselineKind::emd: outputs.push_back(emd_denoise(p.contaminated, cfg.artifact_type).signal); break;
          case BaselineKind::identity: outputs.push_back(p.contaminated); break;
        }
      }
    }
    r.report = evaluate_outputs(method.name, sets.test, outputs);
    write_eval_csv(dir / "eval.csv", r.report, seed);
    write_eval_json(dir / "eval.json", r.report);
    if (r.report.failed() < r.report.pairs.size()) write_examples(dir, sets.test, outputs, r.report);
    r.ok = r.report.failed() < r.report.pairs.size();
    if (!r.ok) r.error = "every test pair failed";
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  r.finished = timestamp();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

namespace {

struct MeanStd {
  double mean = 0, std = 0;
};

MeanStd over_runs(const std::vector<double>& v) {
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  return {mean(v), sample_std(v)};
}

void write_aggregate(const fs::path& out, const ExperimentConfig& cfg, const std::vector<RunResult>& runs) {
  std::ofstream o(out / "aggregate.csv");
  o << "method,snr_db,runs,rrmse_t_mean,rrmse_t_std,rrmse_s_mean,rrmse_s_std,cc_mean,cc_std\n";
  for (const auto& m : cfg.methods) {
    for (double level : cfg.levels()) {
      std::vector<double> t, s, c;
      for (const auto& r : runs) {
        if (r.method != m || !r.ok) continue;
        for (const auto& l : r.report.levels) {
          if (l.snr_db != level || l.count == 0) continue;
          t.push_back(l.mean_rrmse_t);
          s.push_back(l.mean_rrmse_s);
          c.push_back(l.mean_cc);
        }
      }
      const MeanStd a = over_runs(t), b = over_runs(s), d = over_runs(c);
      o << m << ',' << format_real(level) << ',' << t.size() << ',' << format_real(a.mean) << ','
        << format_real(a.std) << ',' << format_real(b.mean) << ',' << format_real(b.std) << ','
        << format_real(d.mean) << ',' << format_real(d.std) << '\n';
    }
  }
}

void write_convergence(const fs::path& out, const ExperimentConfig& cfg, const std::vector<RunResult>& runs) {
  for (const auto& m : cfg.methods) {
    std::vector<const TrainRecord*> recs;
    for (const auto& r : runs)
      if (r.method == m && r.ok && r.record.epochs() > 0) recs.push_back(&r.record);
    if (recs.empty()) continue;
    std::ofstream o(out / ("convergence_" + m + ".csv"));
    o << "epoch,runs,train_loss_mean,train_loss_std,val_loss_mean,val_loss_std\n";
    const std::size_t epochs = recs.front()->epochs();
    for (std::size_t e = 0; e < epochs; ++e) {
      std::vector<double> tr, va;
      for (const auto* rec : recs) {
        tr.push_back(rec->train_loss[e]);
        va.push_back(rec->val_loss[e]);
      }
      const MeanStd a = over_runs(tr), b = over_runs(va);
      o << e + 1 << ',' << recs.size() << ',' << format_real(a.mean) << ',' << format_real(a.std) << ','
        << format_real(b.mean) << ',' << format_real(b.std) << '\n';
    }
  }
}

void write_band_table(const fs::path& out, const ExperimentConfig& cfg, const std::vector<RunResult>& runs) {
  bool any = false;
  for (const auto& r : runs) any = any || (r.ok && r.report.bands.available);
  if (!any) return;
  std::ofstream o(out / "band_ratios.csv");
  o << "method,signal,runs,delta,theta,alpha,beta,gamma\n";
  for (const auto& m : cfg.methods) {
    std::vector<const BandTable*> tabs;
    for (const auto& r : runs)
      if (r.method == m && r.ok && r.report.bands.available) tabs.push_back(&r.report.bands);
    if (tabs.empty()) continue;
    for (const char* which : {"ground_truth", "contaminated", "denoised"}) {
      std::array<double, 5> acc{};
      for (const auto* t : tabs) {
        const BandPowerRatios& b = std::string(which) == "ground_truth"   ? t->ground_truth
                                   : std::string(which) == "contaminated" ? t->contaminated
                                                                          : t->denoised;
        const auto a = b.as_array();
        for (std::size_t k = 0; k < 5; ++k) acc[k] += a[k];
      }
      o << m << ',' << which << ',' << tabs.size();
      for (double v : acc) o << ',' << format_real(v / static_cast<double>(tabs.size()));
      o << '\n';
    }
  }
}

void write_anova(const fs::path& out, const ExperimentConfig& cfg, const std::vector<RunResult>& runs) {
  if (cfg.methods.size() < 2) return;
  std::ofstream o(out / "anova.csv");
  o << "metric,scope,F,p,df_between,df_within\n";
  const char* metrics[] = {"rrmse_t", "rrmse_s", "cc"};
  auto pick = [](const PairMetrics& p, int k) { return k == 0 ? p.rrmse_t : k == 1 ? p.rrmse_s : p.cc; };
  std::vector<std::optional<double>> scopes = {std::nullopt};
  for (double l : cfg.levels()) scopes.emplace_back(l);
  for (int k = 0; k < 3; ++k) {
    for (const auto& scope : scopes) {
      std::vector<std::vector<double>> groups;
      for (const auto& m : cfg.methods) {
        std::vector<double> g;
        for (const auto& r : runs) {
          if (r.method != m || !r.ok) continue;
          for (const auto& p : r.report.pairs)
            if (p.ok && (!scope || p.snr_db == *scope)) g.push_back(pick(p, k));
        }
        groups.push_back(std::move(g));
      }
      const std::string scope_name = scope ? format_real(*scope) : "pooled";
      try {
        const AnovaResult a = anova_oneway(groups);
        o << metrics[k] << ',' << scope_name << ',' << format_real(a.f) << ',' << format_real(a.p) << ','
          << format_real(a.df_between) << ',' << format_real(a.df_within) << '\n';
      } catch (const InvalidInput&) {
        o << metrics[k] << ',' << scope_name << ",nan,nan,nan,nan\n";
      }
    }
  }
}

std::string run_dir_name(const std::string& method, std::uint64_t seed) {
  return method + "_seed" + std::to_string(seed);
}

}  // namespace

BenchmarkSummary cmd_benchmark(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string started = timestamp();
  const Banks banks = load_banks(cfg);
  fs::create_directories(cfg.out / "runs");

  struct Job {
    MethodId method;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& m : cfg.methods)
    for (auto s : cfg.seeds) jobs.push_back({parse_method(m), s});

  std::size_t workers = cfg.workers > 0 ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, jobs.size());
  std::vector<RunResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      log_line("[benchmark] start " + j.method.name + " seed " + std::to_string(j.seed));
      results[i] = run_one(cfg, banks, j.method, j.seed, cfg.out / "runs" / run_dir_name(j.method.name, j.seed));
      const auto& r = results[i];
      char secs[32];
      std::snprintf(secs, sizeof secs, "%.1f", r.seconds);
      log_line("[benchmark] " + std::string(r.ok ? "done " : "FAILED ") + j.method.name + " seed " +
               std::to_string(j.seed) + " in " + secs + " s" + (r.ok ? "" : ": " + r.error));
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  write_aggregate(cfg.out, cfg, results);
  write_convergence(cfg.out, cfg, results);
  write_band_table(cfg.out, cfg, results);
  write_anova(cfg.out, cfg, results);

  BenchmarkSummary summary;
  ordered_json runs = ordered_json::array();
  for (const auto& r : results) {
    if (!r.ok) ++summary.failed;
    ordered_json files = ordered_json::array();
    if (fs::exists(r.dir))
      for (const auto& e : fs::directory_iterator(r.dir)) files.push_back(e.path().filename().string());
    std::sort(files.begin(), files.end());
    runs.push_back({{"method", r.method},
                    {"seed", r.seed},
                    {"dir", fs::relative(r.dir, cfg.out).string()},
                    {"ok", r.ok},
                    {"error", r.error},
                    {"started", r.started},
                    {"finished", r.finished},
                    {"seconds", r.seconds},
                    {"files", files}});
  }
  ordered_json outputs = ordered_json::array();
  for (const auto& e : fs::directory_iterator(cfg.out))
    if (e.is_regular_file() && e.path().extension() == ".csv") outputs.push_back(e.path().filename().string());
  std::sort(outputs.begin(), outputs.end());
  ordered_json manifest;
  manifest["format"] = "eegbench-run-manifest-1";
  manifest["code_version"] = EEGBENCH_VERSION;
  manifest["config"] = ordered_json::parse(config_json(cfg));
  manifest["started"] = started;
  manifest["finished"] = timestamp();
  manifest["runs"] = runs;
  manifest["outputs"] = outputs;
  std::ofstream(cfg.out / "manifest.json") << manifest.dump(2) << '\n';

  summary.runs = std::move(results);
  return summary;
}

}  // namespace eegbench
