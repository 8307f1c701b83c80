#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "eegbench/csv.hpp"
#include "eegbench/experiment.hpp"
#include "eegbench/stats.hpp"
#include "eegbench/svg.hpp"

namespace eegbench {

namespace fs = std::filesystem;

namespace {

struct RunEntry {
  std::string method;
  std::uint64_t seed = 0;
  fs::path dir;
};

struct Manifest {
  std::vector<std::string> methods;
  std::vector<double> levels;
  std::vector<RunEntry> runs;  // successful runs only
};

Manifest read_manifest(const fs::path& results) {
  const fs::path path = results / "manifest.json";
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": missing run manifest");
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(in);
    m.methods = j.at("config").at("methods").get<std::vector<std::string>>();
    m.levels = j.at("config").at("snr_levels").get<std::vector<double>>();
    for (const auto& r : j.at("runs")) {
      if (!r.at("ok").get<bool>()) continue;
      m.runs.push_back({r.at("method").get<std::string>(), r.at("seed").get<std::uint64_t>(),
                        results / r.at("dir").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return m;
}

void copy_if_present(const fs::path& from, const fs::path& to) {
  if (fs::exists(from)) fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

}  // namespace

fs::path cmd_report(const fs::path& results_dir, bool svg) {
  const Manifest man = read_manifest(results_dir);
  const fs::path out = results_dir / "report";
  fs::create_directories(out);

  // Per-pair records and loss curves, grouped by method in config order.
  std::map<std::string, std::vector<std::vector<PairMetrics>>> evals;
  std::map<std::string, std::vector<TrainRecord>> losses;
  for (const auto& r : man.runs) {
    evals[r.method].push_back(read_eval_csv(r.dir / "eval.csv"));
    if (fs::exists(r.dir / "loss.csv")) losses[r.method].push_back(read_loss_csv(r.dir / "loss.csv"));
  }

  std::vector<PlotSeries> loss_series;
  for (const auto& m : man.methods) {
    const auto it = losses.find(m);
    if (it == losses.end()) continue;
    const std::size_t epochs = it->second.front().epochs();
    for (const auto& rec : it->second)
      if (rec.epochs() != epochs)
        throw FormatError(results_dir.string() + ": runs of '" + m + "' disagree on the epoch count");
    std::ofstream o(out / ("loss_" + m + ".csv"));
    o << "epoch,train_loss,val_loss\n";
    PlotSeries tr{m + " train", {}, {}, false}, va{m + " val", {}, {}, true};
    for (std::size_t e = 0; e < epochs; ++e) {
      double t = 0, v = 0;
      for (const auto& rec : it->second) {
        t += rec.train_loss[e];
        v += rec.val_loss[e];
      }
      t /= static_cast<double>(it->second.size());
      v /= static_cast<double>(it->second.size());
      o << e + 1 << ',' << format_real(t) << ',' << format_real(v) << '\n';
      tr.x.push_back(static_cast<double>(e + 1));
      tr.y.push_back(t);
      va.x.push_back(static_cast<double>(e + 1));
      va.y.push_back(v);
    }
    loss_series.push_back(std::move(tr));
    loss_series.push_back(std::move(va));
  }

  const char* metric_names[] = {"rrmse_t", "rrmse_s", "cc"};
  auto pick = [](const PairMetrics& p, int k) { return k == 0 ? p.rrmse_t : k == 1 ? p.rrmse_s : p.cc; };

  std::vector<std::vector<PlotSeries>> snr_series(3);
  {
    std::ofstream o(out / "metric_vs_snr.csv");
    o << "method,snr_db,rrmse_t,rrmse_s,cc\n";
    for (const auto& m : man.methods) {
      const auto it = evals.find(m);
      if (it == evals.end()) continue;
      std::array<PlotSeries, 3> s;
      for (auto& x : s) x.label = m;
      for (double level : man.levels) {
        std::array<std::vector<double>, 3> run_means;
        for (const auto& run : it->second) {
          std::vector<PairMetrics> at_level;
          for (const auto& p : run)
            if (p.snr_db == level) at_level.push_back(p);
          for (const auto& l : summarize_levels(at_level)) {
            if (l.count == 0) continue;
            run_means[0].push_back(l.mean_rrmse_t);
            run_means[1].push_back(l.mean_rrmse_s);
            run_means[2].push_back(l.mean_cc);
          }
        }
        o << m << ',' << format_real(level);
        for (int k = 0; k < 3; ++k) {
          const double v = run_means[k].empty() ? std::numeric_limits<double>::quiet_NaN() : mean(run_means[k]);
          o << ',' << format_real(v);
          s[k].x.push_back(level);
          s[k].y.push_back(v);
        }
        o << '\n';
      }
      for (int k = 0; k < 3; ++k) snr_series[k].push_back(std::move(s[k]));
    }
  }

  {
    std::ofstream o(out / "boxplot.csv");
    o << "method,metric,count,min,q1,median,q3,max\n";
    for (const auto& m : man.methods) {
      const auto it = evals.find(m);
      if (it == evals.end()) continue;
      for (int k = 0; k < 3; ++k) {
        std::vector<double> v;
        for (const auto& run : it->second)
          for (const auto& p : run)
            if (p.ok) v.push_back(pick(p, k));
        if (v.empty()) continue;
        const Quartiles q = quartiles(v);
        o << m << ',' << metric_names[k] << ',' << v.size() << ',' << format_real(q.min) << ','
          << format_real(q.q1) << ',' << format_real(q.median) << ',' << format_real(q.q3) << ','
          << format_real(q.max) << '\n';
      }
    }
  }

  // Example waveforms come from the first successful run of each method.
  for (const auto& m : man.methods) {
    for (const auto& r : man.runs) {
      if (r.method != m) continue;
      copy_if_present(r.dir / "examples.csv", out / ("best_worst_" + m + ".csv"));
      copy_if_present(r.dir / "examples_psd.csv", out / ("best_worst_psd_" + m + ".csv"));
      break;
    }
  }

  if (svg) {
    if (!loss_series.empty())
      std::ofstream(out / "loss_curves.svg") << line_plot_svg("MSE loss per epoch", "epoch", "MSE", loss_series);
    const char* ylabels[] = {"RRMSE temporal", "RRMSE spectral", "CC"};
    for (int k = 0; k < 3; ++k)
      std::ofstream(out / (std::string(metric_names[k]) + "_vs_snr.svg"))
          << line_plot_svg(std::string(ylabels[k]) + " by SNR level", "SNR (dB)", ylabels[k], snr_series[k]);
  }
  return out;
}

}  // namespace eegbench
