#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "eegbench/baselines.hpp"
#include "eegbench/checkpoint.hpp"
#include "eegbench/experiment.hpp"

namespace fs = std::filesystem;
using namespace eegbench;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scale;
  std::optional<std::string> artifact;
  bool surrogate = false;
  std::optional<std::string> out;
  std::optional<std::string> data_root;
  std::vector<std::string> methods;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> epochs;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config");
  cmd->add_option("--seed", f.seed, "Single repetition seed (replaces the config's seed list)");
  cmd->add_option("--scale", f.scale, "desk|paper");
  cmd->add_option("--artifact", f.artifact, "ocular|myogenic");
  cmd->add_flag("--surrogate", f.surrogate, "Use synthetic stand-in banks instead of the dataset");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--data-root", f.data_root, std::string("Dataset directory (default: $") + kDataRootEnv + ")");
}

// Flags override the config file, which overrides the defaults.
ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.seed) c.seeds = {*f.seed};
  if (f.scale) c.scale = parse_scale(*f.scale);
  if (f.artifact) c.artifact_type = parse_artifact_type(*f.artifact);
  if (f.surrogate) c.surrogate = true;
  if (f.out) c.out = *f.out;
  if (f.data_root) c.dataset_root = *f.data_root;
  if (!f.methods.empty()) c.methods = f.methods;
  if (f.workers) c.workers = *f.workers;
  c.validate();
  return c;
}

SemiSyntheticSets sets_for(const ExperimentConfig& c, const std::string& sets_dir) {
  if (!sets_dir.empty()) return read_sets(sets_dir).sets;
  return make_sets(c, load_banks(c), c.seeds.front());
}

int run(int argc, char** argv) {
  CLI::App app{"EEG artifact-removal benchmark"};
  app.require_subcommand(1);

  CommonFlags gen_f, train_f, eval_f, bench_f;
  std::string train_method = "fcnn", train_sets, eval_sets, eval_method, eval_checkpoint, results_dir;
  bool no_svg = false;

  auto* gen = app.add_subcommand("generate", "Write semi-synthetic train/val/test sets");
  add_common(gen, gen_f);

  auto* tr = app.add_subcommand("train", "Train one network and save its checkpoint and loss curve");
  add_common(tr, train_f);
  tr->add_option("--method", train_method, "fcnn|simple_cnn|complex_cnn|rnn");
  tr->add_option("--sets", train_sets, "Directory written by generate (default: generate in memory)");
  tr->add_option("--epochs", train_f.epochs, "Epoch count override");

  auto* ev = app.add_subcommand("evaluate", "Score a checkpoint or a baseline on the test set");
  add_common(ev, eval_f);
  ev->add_option("--method", eval_method, "filter|emd|identity");
  ev->add_option("--checkpoint", eval_checkpoint, "Checkpoint directory written by train");
  ev->add_option("--sets", eval_sets, "Directory written by generate (default: generate in memory)");

  auto* bench = app.add_subcommand("benchmark", "Every method over every seed, plus aggregate tables");
  add_common(bench, bench_f);
  bench->add_option("--methods", bench_f.methods, "Methods to run (replaces the config's list)");
  bench->add_option("--workers", bench_f.workers, "Concurrent jobs (default: hardware threads)");

  auto* rep = app.add_subcommand("report", "Plot-ready series from a benchmark directory");
  rep->add_option("--out,--results", results_dir, "Benchmark output directory")->required();
  rep->add_flag("--no-svg", no_svg, "Skip the SVG charts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*gen) {
    const ExperimentConfig c = resolve(gen_f);
    std::cout << "wrote " << cmd_generate(c).string() << '\n';
    return 0;
  }
  if (*tr) {
    ExperimentConfig c = resolve(train_f);
    const MethodId m = parse_method(train_method);
    if (!m.architecture) throw SpecError("train: '" + train_method + "' is not a network");
    const SemiSyntheticSets sets = sets_for(c, train_sets);
    auto model = build_model(c.model_spec(*m.architecture, c.seeds.front()));
    TrainConfig tc;
    tc.epochs = train_f.epochs ? *train_f.epochs : c.epochs_for(m);
    tc.batch_size = c.preset().batch_size;
    tc.seed = CounterRng::finalize(c.seeds.front() ^ 0x7EA1);
    const TrainRecord rec = train(*model, sets.train, sets.val, tc, [](std::size_t e, double t, double v) {
      std::cerr << "epoch " << e << " train " << t << " val " << v << '\n';
    });
    fs::create_directories(c.out);
    write_loss_csv(c.out / "loss.csv", rec);
    save_checkpoint(c.out / "checkpoint", *model);
    std::cout << "wrote " << (c.out / "checkpoint").string() << '\n';
    return 0;
  }
  if (*ev) {
    const ExperimentConfig c = resolve(eval_f);
    if (eval_method.empty() == eval_checkpoint.empty())
      throw SpecError("evaluate: pass exactly one of --method and --checkpoint");
    const SemiSyntheticSets sets = sets_for(c, eval_sets);
    std::vector<Segment> outputs;
    std::string name = eval_method;
    if (!eval_checkpoint.empty()) {
      auto model = load_checkpoint(eval_checkpoint);
      name = to_string(model->spec().architecture);
      std::vector<Segment> inputs;
      for (const auto& p : sets.test) inputs.push_back(p.contaminated);
      outputs = denoise_batch(*model, inputs);
    } else {
      const MethodId m = parse_method(eval_method);
      if (!m.baseline) throw SpecError("evaluate: networks are evaluated through --checkpoint");
      for (const auto& p : sets.test) {
        if (*m.baseline == BaselineKind::filter) outputs.push_back(filter_denoise(p.contaminated, c.artifact_type));
        else if (*m.baseline == BaselineKind::emd) outputs.push_back(emd_denoise(p.contaminated, c.artifact_type).signal);
        else outputs.push_back(p.contaminated);
      }
    }
    const EvalReport r = evaluate_outputs(name, sets.test, outputs);
    fs::create_directories(c.out);
    write_eval_csv(c.out / "eval.csv", r, c.seeds.front());
    write_eval_json(c.out / "eval.json", r);
    for (const auto& l : r.levels)
      std::cout << name << " snr " << l.snr_db << " rrmse_t " << l.mean_rrmse_t << " rrmse_s " << l.mean_rrmse_s
                << " cc " << l.mean_cc << '\n';
    return r.failed() == r.pairs.size() ? 1 : 0;
  }
  if (*bench) {
    const ExperimentConfig c = resolve(bench_f);
    const BenchmarkSummary s = cmd_benchmark(c);
    std::cout << s.runs.size() - s.failed << "/" << s.runs.size() << " runs succeeded; results in "
              << c.out.string() << '\n';
    return s.failed == s.runs.size() ? 1 : 0;
  }
  if (*rep) {
    std::cout << "wrote " << cmd_report(results_dir, !no_svg).string() << '\n';
    return 0;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const SpecError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
