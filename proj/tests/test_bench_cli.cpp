#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "eegbench/csv.hpp"
#include "eegbench/experiment.hpp"
#include "eegbench/npy.hpp"
#include "eegbench/stats.hpp"

using namespace eegbench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("eegbench_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EEGBENCH_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig desk(const fs::path& out, std::vector<std::string> methods) {
  ExperimentConfig c;
  c.surrogate = true;
  c.methods = std::move(methods);
  c.out = out;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_CASE("config loading") {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "ok.json") << R"({"artifact": "myogenic", "methods": ["filter"], "seeds": [1, 2],
                                        "epochs": {"fcnn": 3}, "surrogate": true})";
  const ExperimentConfig c = load_config(dir / "ok.json");
  CHECK(c.artifact_type == ArtifactType::myogenic);
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(c.epochs_for(parse_method("fcnn")) == 3);
  CHECK(c.levels() == default_snr_levels());
  CHECK(c.preset().artifact_fs == 128);

  std::ofstream(dir / "unknown.json") << R"({"learning_rate": 0.1})";
  CHECK_THROWS_WITH_AS(load_config(dir / "unknown.json"), doctest::Contains("learning_rate"), SpecError);
  std::ofstream(dir / "badtype.json") << R"({"seeds": "zero"})";
  CHECK_THROWS_AS(load_config(dir / "badtype.json"), SpecError);
  std::ofstream(dir / "broken.json") << "{";
  CHECK_THROWS_AS(load_config(dir / "broken.json"), Error);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), Error);
  CHECK_THROWS_AS(parse_method("svm"), SpecError);
  CHECK_THROWS_AS(parse_scale("huge"), SpecError);
  fs::remove_all(dir);
}

TEST_CASE("generate writes deterministic sets") {
  const fs::path a = scratch("gen_a"), b = scratch("gen_b");
  ExperimentConfig c = desk(a, {"filter"});
  cmd_generate(c);
  c.out = b;
  cmd_generate(c);
  const LoadedSets s = read_sets(a);
  CHECK(s.sets.train.size() == 800);
  CHECK(s.sets.val.size() == 100);
  CHECK(s.sets.test.size() == 100);
  CHECK(s.fs == 64);
  CHECK(s.sets.test.front().contaminated.size() == 64);
  for (const char* f : {"manifest.json", "train_contaminated.npy", "test_ground_truth.npy", "val_meta.npy"})
    CHECK(slurp(a / f) == slurp(b / f));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("paper preset expands the ocular training set tenfold") {
  ExperimentConfig c = desk(scratch("paper"), {"filter"});
  c.scale = Scale::paper;
  const SemiSyntheticSets sets = make_sets(c, load_banks(c), 0);
  CHECK(sets.train.size() == 27200);
  CHECK(sets.val.size() == 3400);
  CHECK(sets.test.size() == 3400);
  CHECK(sets.train.front().contaminated.size() == 512);
}

TEST_CASE("benchmark reruns reproduce the aggregate table") {
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  ExperimentConfig c = desk(a, {"filter", "emd"});
  cmd_benchmark(c);
  c.out = b;
  cmd_benchmark(c);
  const CsvTable agg = read_csv(a / "aggregate.csv");
  CHECK(agg.rows.size() == 20);
  CHECK(slurp(a / "aggregate.csv") == slurp(b / "aggregate.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("desk preset runs on a dataset with the published layout") {
  // Surrogate content written in the published file layout stands in for the download.
  const fs::path root = scratch("dataset");
  fs::create_directories(root);
  save_npy(published_file(root, BankKind::EEG), synth_surrogate(BankKind::EEG, 4514, 1).matrix);
  save_npy(published_file(root, BankKind::EOG), synth_surrogate(BankKind::EOG, 3400, 2).matrix);
  save_npy(published_file(root, BankKind::EMG), synth_surrogate(BankKind::EMG, 5598, 3).matrix);
  for (ArtifactType t : {ArtifactType::ocular, ArtifactType::myogenic}) {
    ExperimentConfig c = desk(scratch("dataset_run"), {"filter", "fcnn"});
    c.surrogate = false;
    c.dataset_root = root;
    c.artifact_type = t;
    c.epochs["fcnn"] = 1;
    const Banks banks = load_banks(c);
    CHECK(banks.eeg.count() == 100);
    CHECK(banks.artifact.fs == c.preset().artifact_fs);
    CHECK(banks.artifact.length() == c.preset().artifact_len);
    CHECK(banks.eeg.length() == c.preset().artifact_len);
    const BenchmarkSummary s = cmd_benchmark(c);
    CHECK(s.failed == 0);
    fs::remove_all(c.out);
  }
  fs::remove_all(root);
}

TEST_CASE("missing dataset names the expected files") {
  ExperimentConfig c = desk(scratch("nodata"), {"filter"});
  c.surrogate = false;
  c.dataset_root = "/nonexistent/eegdenoisenet";
  CHECK_THROWS_WITH_AS(load_banks(c), doctest::Contains("--surrogate"), SpecError);
}

TEST_CASE("baseline benchmark, aggregate and report") {
  const fs::path out = scratch("bench");
  ExperimentConfig c = desk(out, {"filter", "emd", "fcnn"});
  c.seeds = {0, 1};
  c.epochs["fcnn"] = 3;
  const BenchmarkSummary s = cmd_benchmark(c);
  REQUIRE(s.runs.size() == 6);
  CHECK(s.failed == 0);

  const CsvTable agg = read_csv(out / "aggregate.csv");
  CHECK(agg.header == std::vector<std::string>{"method", "snr_db", "runs", "rrmse_t_mean", "rrmse_t_std",
                                               "rrmse_s_mean", "rrmse_s_std", "cc_mean", "cc_std"});
  CHECK(agg.rows.size() == 30);
  for (const auto& row : agg.rows)
    for (std::size_t k = 1; k < row.size(); ++k) CHECK(std::isfinite(parse_real(row[k], agg.source)));

  // Each aggregate mean is the mean over runs of the per-run level means.
  const std::size_t cm = agg.column("method"), cs = agg.column("snr_db"), ct = agg.column("rrmse_t_mean"),
                    csd = agg.column("rrmse_t_std");
  for (const auto& row : agg.rows) {
    const double level = parse_real(row[cs], agg.source);
    std::vector<double> run_means;
    for (std::uint64_t seed : {0, 1}) {
      const auto pairs = read_eval_csv(out / "runs" / (row[cm] + "_seed" + std::to_string(seed)) / "eval.csv");
      double sum = 0;
      std::size_t n = 0;
      for (const auto& p : pairs)
        if (p.ok && p.snr_db == level) {
          sum += p.rrmse_t;
          ++n;
        }
      run_means.push_back(sum / static_cast<double>(n));
    }
    CHECK(std::abs(parse_real(row[ct], agg.source) - (run_means[0] + run_means[1]) / 2) < 1e-12);
    CHECK(std::abs(parse_real(row[csd], agg.source) - sample_std(run_means)) < 1e-12);
  }

  CHECK(fs::exists(out / "anova.csv"));
  CHECK(fs::exists(out / "convergence_fcnn.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(fs::exists(out / "runs" / "fcnn_seed0" / "checkpoint" / "model.json"));
  CHECK(read_csv(out / "anova.csv").rows.size() == 3 * 11);

  const fs::path rep = cmd_report(out);
  const CsvTable loss = read_csv(rep / "loss_fcnn.csv");
  CHECK(loss.rows.size() == 3);
  CHECK(fs::exists(rep / "loss_curves.svg"));
  CHECK(fs::exists(rep / "rrmse_t_vs_snr.svg"));
  CHECK(fs::exists(rep / "best_worst_emd.csv"));

  const CsvTable mvs = read_csv(rep / "metric_vs_snr.csv");
  CHECK(mvs.rows.size() == 30);
  for (std::size_t i = 1; i < 10; ++i)
    CHECK(parse_real(mvs.rows[i][1], mvs.source) > parse_real(mvs.rows[i - 1][1], mvs.source));

  // Box statistics recomputed from the per-pair records.
  std::vector<double> values;
  for (std::uint64_t seed : {0, 1})
    for (const auto& p : read_eval_csv(out / "runs" / ("filter_seed" + std::to_string(seed)) / "eval.csv"))
      if (p.ok) values.push_back(p.cc);
  const Quartiles q = quartiles(values);
  const CsvTable box = read_csv(rep / "boxplot.csv");
  bool seen = false;
  for (const auto& row : box.rows) {
    if (row[0] != "filter" || row[1] != "cc") continue;
    seen = true;
    CHECK(std::stoul(row[2]) == values.size());
    CHECK(parse_real(row[4], box.source) == doctest::Approx(q.q1));
    CHECK(parse_real(row[5], box.source) == doctest::Approx(q.median));
    CHECK(parse_real(row[6], box.source) == doctest::Approx(q.q3));
  }
  CHECK(seen);
  CHECK_THROWS_AS(cmd_report(scratch("empty")), FormatError);
  fs::remove_all(out);
}

TEST_CASE("command-line exit codes") {
  const fs::path out = scratch("exit");
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("benchmark --scale galactic --surrogate --out " + out.string()) == 2);
  CHECK(run_cli("benchmark --methods svm --surrogate --out " + out.string()) == 2);
  CHECK(run_cli("generate --data-root /nonexistent --out " + out.string()) == 2);
  CHECK(run_cli("report --out " + (out / "nothing").string()) == 1);
  CHECK(run_cli("generate --surrogate --out " + out.string()) == 0);
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(run_cli("evaluate --method filter --sets " + out.string() + " --out " + (out / "eval").string()) == 0);
  CHECK(fs::exists(out / "eval" / "eval.csv"));
  CHECK(run_cli("train --method fcnn --epochs 1 --sets " + out.string() + " --out " + (out / "fcnn").string()) == 0);
  CHECK(run_cli("evaluate --checkpoint " + (out / "fcnn" / "checkpoint").string() + " --sets " + out.string() +
                " --out " + (out / "eval_fcnn").string()) == 0);
  fs::remove_all(out);
}
