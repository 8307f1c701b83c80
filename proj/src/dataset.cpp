#include "eegbench/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include <nlohmann/json.hpp>

#include "eegbench/dsp.hpp"
#include "eegbench/rng.hpp"

namespace eegbench {

std::string to_string(BankKind k) {
  switch (k) {
    case BankKind::EEG: return "EEG";
    case BankKind::EOG: return "EOG";
    case BankKind::EMG: return "EMG";
  }
  return "?";
}

std::string to_string(ArtifactType a) { return a == ArtifactType::ocular ? "ocular" : "myogenic"; }

ArtifactType parse_artifact_type(const std::string& s) {
  if (s == "ocular" || s == "EOG") return ArtifactType::ocular;
  if (s == "myogenic" || s == "EMG") return ArtifactType::myogenic;
  throw SpecError("unknown artifact type '" + s + "' (expected ocular|myogenic)");
}

Segment SegmentBank::segment(std::size_t row) const {
  const auto r = matrix.row(row);
  return Segment(std::vector<double>(r.begin(), r.end()), fs);
}

void SegmentBank::validate() const {
  if (fs <= 0) throw InvalidInput(to_string(kind) + " bank: sampling rate must be positive");
  if (matrix.rows == 0 || matrix.cols == 0) throw InvalidInput(to_string(kind) + " bank: empty matrix");
  for (double v : matrix.data)
    if (!std::isfinite(v)) throw InvalidInput(to_string(kind) + " bank: non-finite value");
}

void SegmentBank::validate_published_layout() const {
  validate();
  const std::size_t want_len = kind == BankKind::EMG ? 1024 : 512;
  const int want_fs = kind == BankKind::EMG ? 512 : 256;
  if (matrix.cols != want_len || fs != want_fs)
    throw FormatError(to_string(kind) + " bank: expected rows of " + std::to_string(want_len) + " samples @" +
                      std::to_string(want_fs) + " Hz, got " + std::to_string(matrix.cols) + " @" +
                      std::to_string(fs));
}

SegmentBank load_bank(const std::filesystem::path& path, BankKind kind) {
  SegmentBank b;
  b.kind = kind;
  b.matrix = load_npy(path);
  b.fs = kind == BankKind::EMG ? 512 : 256;
  b.validate_published_layout();
  return b;
}

std::filesystem::path published_file(const std::filesystem::path& root, BankKind kind) {
  switch (kind) {
    case BankKind::EEG: return root / "EEG_all_epochs.npy";
    case BankKind::EOG: return root / "EOG_all_epochs.npy";
    case BankKind::EMG: return root / "EMG_all_epochs.npy";
  }
  return root;
}

SplitIndices split(std::size_t n, const SplitRatios& ratios, std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.val > 0 && ratios.test > 0))
    throw InvalidInput("split: ratios must be positive");
  const double total = ratios.train + ratios.val + ratios.test;
  if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("split: ratios must sum to 1");
  // A tiny epsilon keeps exact products such as 3400*0.1 from flooring one short.
  auto part = [n](double r) { return static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-9)); };
  const std::size_t n_val = part(ratios.val);
  const std::size_t n_test = part(ratios.test);
  if (n < 10 || n_val == 0 || n_test == 0 || n_val + n_test >= n)
    throw InvalidInput("split: " + std::to_string(n) + " items cannot give every part at least one");

  CounterRng rng(seed, 0x5117);
  const auto perm = permutation(n, rng);
  SplitIndices out;
  out.val.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
  out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_val),
                  perm.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
  out.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_val + n_test), perm.end());
  return out;
}

std::vector<double> default_snr_levels() { return {-7, -6, -5, -4, -3, -2, -1, 0, 1, 2}; }
std::vector<double> extended_myogenic_levels() { return {-7, -6, -5, -4, -3, -2, -1, 0, 1, 2, 3, 4}; }

SegmentBank resample_bank(const SegmentBank& b, int fs_to) {
  SegmentBank out;
  out.kind = b.kind;
  out.fs = fs_to;
  for (std::size_t r = 0; r < b.count(); ++r) {
    const Segment s = resample(b.segment(r), fs_to);
    if (r == 0) out.matrix = Matrix(b.count(), s.size());
    std::copy(s.samples().begin(), s.samples().end(), out.matrix.row(r).begin());
  }
  return out;
}

namespace {

std::vector<SemiSyntheticPair> expand(const SegmentBank& eeg, const SegmentBank& art,
                                      const std::vector<std::size_t>& eeg_rows,
                                      const std::vector<std::size_t>& art_rows, const GenerationConfig& cfg,
                                      CounterRng& rng) {
  std::vector<SemiSyntheticPair> out;
  out.reserve(eeg_rows.size() * cfg.snr_levels.size());
  std::vector<std::vector<std::size_t>> partners;
  if (cfg.repair_per_level) {
    for (std::size_t l = 0; l < cfg.snr_levels.size(); ++l) {
      const auto p = permutation(art_rows.size(), rng);
      std::vector<std::size_t> rows(p.size());
      for (std::size_t i = 0; i < p.size(); ++i) rows[i] = art_rows[p[i]];
      partners.push_back(std::move(rows));
    }
  }
  for (std::size_t k = 0; k < eeg_rows.size(); ++k) {
    const Segment x = eeg.segment(eeg_rows[k]);
    for (std::size_t l = 0; l < cfg.snr_levels.size(); ++l) {
      const std::size_t a = cfg.repair_per_level ? partners[l][k] : art_rows[k];
      const Segment n = art.segment(a);
      const double snr = cfg.snr_levels[l];
      const double lambda = lambda_for_snr(x, n, snr);
      Segment y = mix(x, n, lambda);
      const double sigma = population_std(y.view());
      out.push_back(SemiSyntheticPair{x, std::move(y), lambda, snr, sigma, eeg_rows[k], a});
    }
  }
  return out;
}

}  // namespace

SemiSyntheticSets generate_semisynthetic(const SegmentBank& eeg_in, const SegmentBank& art,
                                         const GenerationConfig& cfg) {
  if (cfg.snr_levels.empty()) throw InvalidInput("generate: no SNR levels");
  if (eeg_in.kind != BankKind::EEG) throw InvalidInput("generate: first bank must be EEG");
  const BankKind want = cfg.artifact_type == ArtifactType::ocular ? BankKind::EOG : BankKind::EMG;
  if (art.kind != want)
    throw InvalidInput("generate: " + to_string(cfg.artifact_type) + " task needs an " + to_string(want) +
                       " bank, got " + to_string(art.kind));
  eeg_in.validate();
  art.validate();

  SegmentBank upsampled;
  const SegmentBank* eeg = &eeg_in;
  if (eeg_in.fs != art.fs) {
    if (cfg.artifact_type == ArtifactType::ocular)
      throw InvalidInput("generate: ocular task needs equal sampling rates");
    upsampled = resample_bank(eeg_in, art.fs);
    eeg = &upsampled;
  }
  if (eeg->length() != art.length())
    throw InvalidInput("generate: EEG rows have " + std::to_string(eeg->length()) + " samples, artifact rows " +
                       std::to_string(art.length()));

  CounterRng rng(cfg.seed, 0xD47A);
  SemiSyntheticSets sets;
  sets.artifact_split = split(art.count(), cfg.ratios, cfg.seed ^ 0xA27ULL);

  const std::size_t n_eeg = eeg->count();
  const std::size_t n_art = art.count();
  std::array<std::vector<std::size_t>, 3> eeg_rows;
  if (n_eeg >= n_art) {
    // Draw as many EEG rows as there are artifacts, then split them the same way.
    const auto perm = permutation(n_eeg, rng);
    const std::size_t n_val = sets.artifact_split.val.size();
    const std::size_t n_test = sets.artifact_split.test.size();
    sets.eeg_split.val.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
    sets.eeg_split.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_val),
                               perm.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
    sets.eeg_split.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_val + n_test),
                                perm.begin() + static_cast<std::ptrdiff_t>(n_art));
    eeg_rows = {sets.eeg_split.train, sets.eeg_split.val, sets.eeg_split.test};
  } else {
    // Fewer EEG rows than artifacts: reuse EEG rows at random, never across splits.
    sets.eeg_split = split(n_eeg, cfg.ratios, cfg.seed ^ 0xEE6ULL);
    const std::array<const std::vector<std::size_t>*, 3> pools = {&sets.eeg_split.train, &sets.eeg_split.val,
                                                                  &sets.eeg_split.test};
    const std::array<std::size_t, 3> need = {sets.artifact_split.train.size(), sets.artifact_split.val.size(),
                                             sets.artifact_split.test.size()};
    for (std::size_t s = 0; s < 3; ++s) {
      const auto& pool = *pools[s];
      std::vector<std::size_t> rows;
      rows.reserve(need[s]);
      while (rows.size() + pool.size() <= need[s]) rows.insert(rows.end(), pool.begin(), pool.end());
      while (rows.size() < need[s]) rows.push_back(pool[rng.below(pool.size())]);
      const auto p = permutation(rows.size(), rng);
      eeg_rows[s].resize(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) eeg_rows[s][i] = rows[p[i]];
    }
  }

  sets.train = expand(*eeg, art, eeg_rows[0], sets.artifact_split.train, cfg, rng);
  sets.val = expand(*eeg, art, eeg_rows[1], sets.artifact_split.val, cfg, rng);
  sets.test = expand(*eeg, art, eeg_rows[2], sets.artifact_split.test, cfg, rng);
  return sets;
}

namespace {

void write_split(const std::filesystem::path& dir, const std::string& name,
                 const std::vector<SemiSyntheticPair>& pairs) {
  const std::size_t len = pairs.empty() ? 0 : pairs.front().ground_truth.size();
  Matrix gt(pairs.size(), len), ct(pairs.size(), len), meta(pairs.size(), 5);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    std::copy(p.ground_truth.samples().begin(), p.ground_truth.samples().end(), gt.row(i).begin());
    std::copy(p.contaminated.samples().begin(), p.contaminated.samples().end(), ct.row(i).begin());
    meta(i, 0) = p.snr_db;
    meta(i, 1) = p.lambda;
    meta(i, 2) = p.sigma_y;
    meta(i, 3) = static_cast<double>(p.eeg_index);
    meta(i, 4) = static_cast<double>(p.artifact_index);
  }
  save_npy(dir / (name + "_ground_truth.npy"), gt);
  save_npy(dir / (name + "_contaminated.npy"), ct);
  save_npy(dir / (name + "_meta.npy"), meta);
}

std::vector<SemiSyntheticPair> read_split(const std::filesystem::path& dir, const std::string& name, int fs) {
  const Matrix gt = load_npy(dir / (name + "_ground_truth.npy"));
  const Matrix ct = load_npy(dir / (name + "_contaminated.npy"));
  const Matrix meta = load_npy(dir / (name + "_meta.npy"));
  if (gt.rows != ct.rows || gt.rows != meta.rows || gt.cols != ct.cols || meta.cols != 5)
    throw FormatError((dir / name).string() + ": inconsistent split files");
  std::vector<SemiSyntheticPair> out;
  out.reserve(gt.rows);
  for (std::size_t i = 0; i < gt.rows; ++i) {
    auto g = gt.row(i);
    auto c = ct.row(i);
    out.push_back(SemiSyntheticPair{Segment({g.begin(), g.end()}, fs), Segment({c.begin(), c.end()}, fs), meta(i, 1),
                                    meta(i, 0), meta(i, 2), static_cast<std::size_t>(meta(i, 3)),
                                    static_cast<std::size_t>(meta(i, 4))});
  }
  return out;
}

}  // namespace

void write_sets(const std::filesystem::path& dir, const SemiSyntheticSets& sets, const GenerationConfig& cfg, int fs) {
  std::filesystem::create_directories(dir);
  write_split(dir, "train", sets.train);
  write_split(dir, "val", sets.val);
  write_split(dir, "test", sets.test);

  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "eegbench-semisynthetic-v1";
  j["artifact_type"] = to_string(cfg.artifact_type);
  j["seed"] = cfg.seed;
  j["fs"] = fs;
  j["snr_levels"] = cfg.snr_levels;
  j["ratios"] = {cfg.ratios.train, cfg.ratios.val, cfg.ratios.test};
  j["repair_per_level"] = cfg.repair_per_level;
  auto lambdas = [](const std::vector<SemiSyntheticPair>& v) {
    std::vector<double> out;
    for (const auto& p : v) out.push_back(p.lambda);
    return out;
  };
  j["lambda"] = {{"train", lambdas(sets.train)}, {"val", lambdas(sets.val)}, {"test", lambdas(sets.test)}};
  j["eeg_split"] = {{"train", sets.eeg_split.train}, {"val", sets.eeg_split.val}, {"test", sets.eeg_split.test}};
  j["artifact_split"] = {{"train", sets.artifact_split.train},
                         {"val", sets.artifact_split.val},
                         {"test", sets.artifact_split.test}};
  std::ofstream out(dir / "manifest.json");
  out << j.dump(1) << "\n";
}

LoadedSets read_sets(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw FormatError((dir / "manifest.json").string() + ": missing dataset manifest");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError((dir / "manifest.json").string() + ": " + e.what());
  }
  LoadedSets out;
  out.fs = j.at("fs").get<int>();
  out.cfg.artifact_type = parse_artifact_type(j.at("artifact_type").get<std::string>());
  out.cfg.seed = j.at("seed").get<std::uint64_t>();
  out.cfg.snr_levels = j.at("snr_levels").get<std::vector<double>>();
  const auto r = j.at("ratios").get<std::vector<double>>();
  out.cfg.ratios = {r.at(0), r.at(1), r.at(2)};
  out.cfg.repair_per_level = j.value("repair_per_level", false);
  out.sets.train = read_split(dir, "train", out.fs);
  out.sets.val = read_split(dir, "val", out.fs);
  out.sets.test = read_split(dir, "test", out.fs);
  auto idx = [&](const char* a, const char* b) { return j.at(a).at(b).get<std::vector<std::size_t>>(); };
  out.sets.eeg_split = {idx("eeg_split", "train"), idx("eeg_split", "val"), idx("eeg_split", "test")};
  out.sets.artifact_split = {idx("artifact_split", "train"), idx("artifact_split", "val"),
                             idx("artifact_split", "test")};
  return out;
}

}  // namespace eegbench
