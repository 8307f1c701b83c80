// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Usage: acceptance <eegbench-cli> <work-dir>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "eegbench/baselines.hpp"
#include "eegbench/csv.hpp"
#include "eegbench/dsp.hpp"
#include "eegbench/emd.hpp"
#include "eegbench/metrics.hpp"
#include "eegbench/models.hpp"
#include "eegbench/rng.hpp"
#include "eegbench/stats.hpp"
#include "eegbench/train.hpp"

using namespace eegbench;
using ad::Tape;
using ad::Tensor;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  enum Status { pass, fail, skip } status = fail;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

Tensor randn(ad::Shape shape, std::uint64_t stream, double scale = 1.0) {
  CounterRng rng(31, stream);
  std::vector<double> v(ad::numel(shape));
  for (double& x : v) x = scale * rng.normal();
  return Tensor(std::move(shape), std::move(v), true);
}

Tensor weighted_sum(Tape& tape, const Tensor& y) {
  CounterRng rng(32, y.size());
  std::vector<double> w(y.size());
  for (double& x : w) x = rng.normal();
  return ad::sum(tape, ad::mul(tape, y, Tensor(y.shape(), std::move(w))));
}

// --- 1 ---------------------------------------------------------------------------
Outcome snr_round_trip() {
  const SegmentBank eeg = synth_surrogate(BankKind::EEG, 100, 1);
  const SegmentBank eog = synth_surrogate(BankKind::EOG, 100, 2);
  double worst = 0;
  for (double level : default_snr_levels())
    for (std::size_t i = 0; i < 100; ++i) {
      const Segment x = eeg.segment(i), n = eog.segment(i);
      const double lam = lambda_for_snr(x, n, level);
      worst = std::max(worst, std::abs(snr_of(x, n.scaled(lam)) - level));
    }
  return verdict(worst < 1e-9, "max |error| " + num(worst) + " dB");
}

// --- 2 ---------------------------------------------------------------------------
Outcome gradient_fidelity() {
  std::map<std::string, double> errs;
  auto check = [&](const std::string& name, const ad::LossFn& fn, const std::vector<Tensor>& ps) {
    errs[name] = ad::grad_check(fn, ps).max_rel_error;
  };
  const Tensor a = randn({3, 4}, 1), b = randn({4, 5}, 2), c = randn({3, 4}, 3), bias = randn({4}, 4);
  const Tensor x3 = randn({2, 3, 16}, 5), w3 = randn({4, 3, 3}, 6), b3 = randn({4}, 7);
  const Tensor gamma = randn({3}, 8), beta = randn({3}, 9);
  const Tensor kinkless = randn({3, 4}, 10);
  for (double& v : kinkless.raw()->value)
    if (std::abs(v) < 0.05) v = 0.5;
  check("matmul", [&](Tape& t) { return weighted_sum(t, ad::matmul(t, a, b)); }, {a, b});
  check("add", [&](Tape& t) { return weighted_sum(t, ad::add(t, a, c)); }, {a, c});
  check("add_bias", [&](Tape& t) { return weighted_sum(t, ad::add_bias(t, a, bias)); }, {a, bias});
  check("mul", [&](Tape& t) { return weighted_sum(t, ad::mul(t, a, c)); }, {a, c});
  check("scale", [&](Tape& t) { return weighted_sum(t, ad::scale(t, a, -0.3)); }, {a});
  check("relu", [&](Tape& t) { return weighted_sum(t, ad::relu(t, kinkless)); }, {kinkless});
  check("sigmoid", [&](Tape& t) { return weighted_sum(t, ad::sigmoid(t, a)); }, {a});
  check("tanh", [&](Tape& t) { return weighted_sum(t, ad::tanh(t, a)); }, {a});
  check("conv1d", [&](Tape& t) { return weighted_sum(t, ad::conv1d(t, x3, w3, b3, {2, 1})); }, {x3, w3, b3});
  const std::vector<double> mask = {1, 0, 1, 1, 1, 0, 1, 1, 0, 1, 1, 1};
  check("dropout", [&](Tape& t) { return weighted_sum(t, ad::dropout(t, a, mask, 0.75)); }, {a});
  check("batchnorm1d",
        [&](Tape& t) {
          ad::BatchNormState st{std::vector<double>(3, 0.0), std::vector<double>(3, 1.0)};
          return weighted_sum(t, ad::batchnorm1d(t, x3, gamma, beta, st, true));
        },
        {x3, gamma, beta});
  check("reshape/flatten", [&](Tape& t) { return weighted_sum(t, ad::reshape(t, ad::flatten(t, x3), {6, 16})); },
        {x3});
  check("slice/concat",
        [&](Tape& t) { return weighted_sum(t, ad::concat(t, {ad::slice(t, x3, 2, 3, 5), ad::slice(t, x3, 2, 0, 2)}, 2)); },
        {x3});
  check("sum/mse", [&](Tape& t) { return ad::mse(t, a, c); }, {a, c});
  const Tensor wx = randn({1, 8}, 11, 0.5), wh = randn({2, 8}, 12, 0.5), lb = randn({8}, 13), xs = randn({3, 4}, 14);
  check("lstm_cell",
        [&](Tape& t) {
          ad::LstmState st{Tensor::zeros({3, 2}), Tensor::zeros({3, 2})};
          for (std::size_t k = 0; k < 4; ++k) st = ad::lstm_cell(t, ad::slice(t, xs, 1, k, 1), st, wx, wh, lb);
          return weighted_sum(t, st.h);
        },
        {wx, wh, lb, xs});
  for (Architecture arch : {Architecture::FCNN, Architecture::SimpleCNN, Architecture::ComplexCNN, Architecture::RNN}) {
    for (std::size_t len : {std::size_t{16}, std::size_t{32}}) {
      ModelSpec s;
      s.architecture = arch;
      s.input_len = len;
      s.feature_maps = 3;
      s.branch_width = 2;
      s.hidden_size = 2;
      s.dropout = 0.0;
      s.init_seed = 5;
      auto m = build_model(s);
      const Tensor in = randn({2, len}, 20 + len), target = randn({2, len}, 21 + len);
      ForwardContext ctx{true, nullptr};
      check(to_string(arch) + "@" + std::to_string(len),
            [&](Tape& t) { return ad::mse(t, m->forward(t, Tensor(in.shape(), in.values()), ctx), target); },
            m->parameters());
    }
  }
  std::string worst_name;
  double worst = 0;
  for (const auto& [name, e] : errs)
    if (e >= worst) {
      worst = e;
      worst_name = name;
    }
  return verdict(worst < 1e-4, "worst " + worst_name + " " + num(worst) + " over " + std::to_string(errs.size()) +
                                   " checks");
}

// --- 3 ---------------------------------------------------------------------------
Outcome metric_identities() {
  const Segment x = synth_surrogate(BankKind::EEG, 1, 3).segment(0);
  const Segment neg = x.scaled(-1.0);
  const Segment zero(std::vector<double>(x.size(), 0.0), x.fs());
  const bool ok = rrmse_temporal(x, x) == 0.0 && rrmse_spectral(x, x) == 0.0 && std::abs(cc(x, x) - 1.0) < 1e-12 &&
                  std::abs(cc(neg, x) + 1.0) < 1e-12 && rrmse_temporal(zero, x) == 1.0;
  return verdict(ok, "cc(x,x)-1 = " + num(cc(x, x) - 1.0) + ", rrmse_t(0,x) = " + num(rrmse_temporal(zero, x)));
}

// --- 4 ---------------------------------------------------------------------------
Outcome emd_completeness() {
  const SegmentBank eeg = synth_surrogate(BankKind::EEG, 100, 4);
  double worst = 0;
  std::size_t decomposed = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const Segment s = eeg.segment(i);
    const ImfSet set = emd(s);
    ++decomposed;
    double num2 = 0, den2 = 0;
    for (std::size_t t = 0; t < s.size(); ++t) {
      double sum = set.residual[t];
      for (const auto& imf : set.imfs) sum += imf[t];
      num2 += (sum - s[t]) * (sum - s[t]);
      den2 += s[t] * s[t];
    }
    worst = std::max(worst, std::sqrt(num2 / den2));
  }
  return verdict(worst < 1e-8, std::to_string(decomposed) + " segments, max relative error " + num(worst));
}

// --- 5 ---------------------------------------------------------------------------
Outcome filter_signature() {
  const SegmentBank eeg = synth_surrogate(BankKind::EEG, 100, 5);
  std::array<double, 5> acc{};
  for (std::size_t i = 0; i < eeg.count(); ++i) {
    const auto r = band_power_ratios(filter_denoise(eeg.segment(i), ArtifactType::ocular)).as_array();
    for (std::size_t k = 0; k < 5; ++k) acc[k] += r[k] / static_cast<double>(eeg.count());
  }
  const double low = acc[0] + acc[1] + acc[2];
  return verdict(low < 0.01, "mean ratios " + num(acc[0]) + " " + num(acc[1]) + " " + num(acc[2]) + " " +
                                 num(acc[3]) + " " + num(acc[4]) + "; delta+theta+alpha " + num(low));
}

// --- 6 ---------------------------------------------------------------------------
Outcome contamination_signature() {
  const std::size_t n = 100;
  const SegmentBank eeg = synth_surrogate(BankKind::EEG, n, 6);
  const SegmentBank eog = synth_surrogate(BankKind::EOG, n, 7);
  const SegmentBank emg = synth_surrogate(BankKind::EMG, n, 8);
  const SegmentBank eeg_hi = resample_bank(eeg, emg.fs);
  double clean_delta = 0, mixed_delta = 0, clean_gamma = 0, mixed_gamma = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Segment x = eeg.segment(i), a = eog.segment(i);
    clean_delta += band_power_ratios(x).delta / n;
    mixed_delta += band_power_ratios(mix(x, a, lambda_for_snr(x, a, -3.0))).delta / n;
    const Segment xh = eeg_hi.segment(i), m = emg.segment(i);
    clean_gamma += band_power_ratios(xh).gamma / n;
    mixed_gamma += band_power_ratios(mix(xh, m, lambda_for_snr(xh, m, -3.0))).gamma / n;
  }
  return verdict(mixed_delta > clean_delta && mixed_gamma > clean_gamma,
                 "delta " + num(clean_delta) + " -> " + num(mixed_delta) + ", gamma " + num(clean_gamma) + " -> " +
                     num(mixed_gamma));
}

// --- 7-10: desk benchmark through the command-line tool -------------------------
struct DeskRuns {
  bool ran = false;
  std::string error;
  fs::path first, second;
};

DeskRuns run_desk(const std::string& cli, const fs::path& work) {
  DeskRuns d;
  d.first = work / "desk_a";
  d.second = work / "desk_b";
  for (const auto& out : {d.first, d.second}) {
    fs::remove_all(out);
    const std::string cmd = cli + " benchmark --scale desk --surrogate --artifact ocular --seed 0 --workers 1" +
                            " --methods identity filter fcnn simple_cnn --out " + out.string() + " > " +
                            (work / (out.filename().string() + ".log")).string() + " 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      d.error = "benchmark command failed; see " + (work / (out.filename().string() + ".log")).string();
      return d;
    }
  }
  d.ran = true;
  return d;
}

std::map<std::string, std::vector<std::pair<double, double>>> level_means(const fs::path& out) {
  const CsvTable t = read_csv(out / "aggregate.csv");
  const std::size_t cm = t.column("method"), cs = t.column("snr_db"), ct = t.column("rrmse_t_mean");
  std::map<std::string, std::vector<std::pair<double, double>>> r;
  for (const auto& row : t.rows) r[row[cm]].push_back({parse_real(row[cs], t.source), parse_real(row[ct], t.source)});
  return r;
}

Outcome snr_trend(const DeskRuns& d) {
  if (!d.ran) return {Outcome::fail, d.error};
  const auto means = level_means(d.first);
  bool ok = true;
  std::string detail;
  for (const std::string m : {"filter", "fcnn"}) {
    std::vector<double> snr, err;
    for (auto [s, e] : means.at(m)) {
      snr.push_back(s);
      err.push_back(e);
    }
    const double rho = spearman(snr, err);
    ok = ok && snr.size() == 10 && rho <= -0.8;
    detail += m + " rho " + num(rho) + "  ";
  }
  return verdict(ok, detail);
}

Outcome learning_sanity(const DeskRuns& d) {
  if (!d.ran) return {Outcome::fail, d.error};
  bool ok = true;
  std::string detail;
  for (const std::string m : {"fcnn", "simple_cnn"}) {
    const TrainRecord rec = read_loss_csv(d.first / "runs" / (m + "_seed0") / "loss.csv");
    const auto& l = rec.train_loss;
    const double ratio = l.back() / l.front();
    bool monotone = l.size() >= 5;
    for (std::size_t i = 5; i < l.size(); ++i) {
      double prev = 0, cur = 0;
      for (std::size_t k = 0; k < 5; ++k) {
        prev += l[i - 1 - k];
        cur += l[i - k];
      }
      monotone = monotone && cur <= prev;
    }
    ok = ok && ratio < 0.5 && monotone;
    detail += m + " final/first " + num(ratio) + (monotone ? " smoothed non-increasing  " : " smoothed rises  ");
  }
  return verdict(ok, detail);
}

Outcome beats_identity(const DeskRuns& d) {
  if (!d.ran) return {Outcome::fail, d.error};
  const auto means = level_means(d.first);
  auto at = [&](const std::string& m) {
    for (auto [s, e] : means.at(m))
      if (s == -7.0) return e;
    return std::nan("");
  };
  const double f = at("fcnn"), id = at("identity");
  return verdict(f < id, "rrmse_t at -7 dB: fcnn " + num(f) + ", identity " + num(id));
}

Outcome determinism(const DeskRuns& d) {
  if (!d.ran) return {Outcome::fail, d.error};
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const std::string a = slurp(d.first / "aggregate.csv"), b = slurp(d.second / "aggregate.csv");
  return verdict(!a.empty() && a == b, std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "differ"));
}

// --- 11 --------------------------------------------------------------------------
Outcome dataset_layout() {
  const char* root = std::getenv("EEGBENCH_DATA_ROOT");
  if (!root || !*root) return {Outcome::skip, "EEGBENCH_DATA_ROOT not set"};
  const SegmentBank eeg = load_bank(published_file(root, BankKind::EEG), BankKind::EEG);
  const SegmentBank eog = load_bank(published_file(root, BankKind::EOG), BankKind::EOG);
  const SegmentBank emg = load_bank(published_file(root, BankKind::EMG), BankKind::EMG);
  eeg.validate_published_layout();
  eog.validate_published_layout();
  emg.validate_published_layout();
  const bool shapes = eeg.count() == 4514 && eeg.length() == 512 && eog.count() == 3400 && eog.length() == 512 &&
                      emg.count() == 5598 && emg.length() == 1024;
  const std::array<double, 5> expected = {0.143, 0.141, 0.093, 0.467, 0.157};
  std::array<double, 5> acc{};
  for (std::size_t i = 0; i < eeg.count(); ++i) {
    const auto r = band_power_ratios(eeg.segment(i)).as_array();
    for (std::size_t k = 0; k < 5; ++k) acc[k] += r[k] / static_cast<double>(eeg.count());
  }
  double worst = 0;
  for (std::size_t k = 0; k < 5; ++k) worst = std::max(worst, std::abs(acc[k] - expected[k]));
  return verdict(shapes && worst <= 0.02, std::string(shapes ? "shapes ok" : "unexpected shapes") +
                                              ", max band deviation " + num(worst));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <eegbench-cli> <work-dir>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path work = argv[2];
  fs::create_directories(work);

  DeskRuns desk;
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "snr round trip", snr_round_trip},
      {2, "gradient fidelity", gradient_fidelity},
      {3, "metric identities", metric_identities},
      {4, "emd completeness", emd_completeness},
      {5, "filter spectral signature", filter_signature},
      {6, "contamination signature", contamination_signature},
      {7, "snr trend", [&] {
         desk = run_desk(cli, work);
         return snr_trend(desk);
       }},
      {8, "learning sanity", [&] { return learning_sanity(desk); }},
      {9, "denoising beats identity", [&] { return beats_identity(desk); }},
      {10, "determinism", [&] { return determinism(desk); }},
      {11, "published dataset layout", dataset_layout},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Outcome::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.status == Outcome::pass ? "PASS" : o.status == Outcome::skip ? "SKIP" : "FAIL";
    if (o.status == Outcome::fail) ++failures;
    std::printf("[%s] criterion %2d %-28s %8.2f s  %s\n", tag, c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
