#include "eegbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#include "eegbench/csv.hpp"

namespace eegbench {

namespace {

void check_lengths(const Segment& a, const Segment& b, const char* what) {
  if (a.size() != b.size())
    throw ShapeError(std::string(what) + ": lengths differ (" + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + ")");
}

// Periodogram bins up to the cap.
std::vector<double> capped_power(const Segment& s) {
  const PsdEstimate p = psd(s);
  std::vector<double> out;
  const bool cap = s.fs() >= 240;
  for (std::size_t k = 0; k < p.power.size(); ++k) {
    if (cap && p.freqs[k] > 120.0) break;
    out.push_back(p.power[k]);
  }
  return out;
}

}  // namespace

double rrmse_temporal(const Segment& denoised, const Segment& truth) {
  check_lengths(denoised, truth, "rrmse_temporal");
  const double den = rms(truth);
  if (den == 0) throw DegenerateSignal("rrmse_temporal: ground truth has zero RMS");
  std::vector<double> d(truth.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = denoised[i] - truth[i];
  return rms(d) / den;
}

double rrmse_spectral(const Segment& denoised, const Segment& truth) {
  check_lengths(denoised, truth, "rrmse_spectral");
  if (denoised.fs() != truth.fs()) throw InvalidInput("rrmse_spectral: sampling rates differ");
  const auto pt = capped_power(truth);
  const auto pd = capped_power(denoised);
  const double den = rms(pt);
  if (den == 0) throw DegenerateSignal("rrmse_spectral: ground-truth PSD is zero");
  std::vector<double> d(pt.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = pd[i] - pt[i];
  return rms(d) / den;
}

double cc(const Segment& denoised, const Segment& truth) {
  check_lengths(denoised, truth, "cc");
  const double ma = mean(denoised.view()), mb = mean(truth.view());
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double a = denoised[i] - ma, b = truth[i] - mb;
    sab += a * b;
    saa += a * a;
    sbb += b * b;
  }
  if (saa == 0 || sbb == 0) throw DegenerateSignal("cc: constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::size_t EvalReport::failed() const {
  return static_cast<std::size_t>(std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return !p.ok; }));
}

std::vector<LevelSummary> summarize_levels(const std::vector<PairMetrics>& pairs) {
  std::map<double, std::vector<const PairMetrics*>> by_level;
  for (const auto& p : pairs) by_level[p.snr_db].push_back(&p);
  std::vector<LevelSummary> out;
  for (const auto& [snr, members] : by_level) {
    LevelSummary s;
    s.snr_db = snr;
    std::vector<double> t, sp, c;
    for (const auto* p : members) {
      if (!p->ok) {
        ++s.failed;
        continue;
      }
      t.push_back(p->rrmse_t);
      sp.push_back(p->rrmse_s);
      c.push_back(p->cc);
    }
    s.count = t.size();
    if (s.count > 0) {
      s.mean_rrmse_t = mean(t);
      s.std_rrmse_t = population_std(t);
      s.mean_rrmse_s = mean(sp);
      s.std_rrmse_s = population_std(sp);
      s.mean_cc = mean(c);
      s.std_cc = population_std(c);
    }
    out.push_back(s);
  }
  return out;
}

EvalReport evaluate_outputs(const std::string& method, const std::vector<SemiSyntheticPair>& pairs,
                            const std::vector<Segment>& outputs) {
  if (outputs.size() != pairs.size())
    throw ShapeError("evaluate: " + std::to_string(outputs.size()) + " outputs for " + std::to_string(pairs.size()) +
                     " pairs");
  EvalReport r;
  r.method = method;
  const bool bands = !pairs.empty() && pairs.front().ground_truth.fs() >= 160;
  std::array<double, 5> gt{}, ct{}, dn{};
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    PairMetrics m;
    m.pair_index = i;
    m.snr_db = p.snr_db;
    try {
      m.rrmse_t = rrmse_temporal(outputs[i], p.ground_truth);
      m.rrmse_s = rrmse_spectral(outputs[i], p.ground_truth);
      m.cc = cc(outputs[i], p.ground_truth);
    } catch (const Error& e) {
      m.ok = false;
      m.error = e.what();
    }
    if (m.ok && bands) {
      try {
        const auto a = band_power_ratios(p.ground_truth).as_array();
        const auto b = band_power_ratios(p.contaminated).as_array();
        const auto c = band_power_ratios(outputs[i]).as_array();
        for (std::size_t k = 0; k < 5; ++k) {
          gt[k] += a[k];
          ct[k] += b[k];
          dn[k] += c[k];
        }
        ++r.bands.count;
      } catch (const Error&) {
      }
    }
    r.pairs.push_back(std::move(m));
  }
  if (r.bands.count > 0) {
    r.bands.available = true;
    const double n = static_cast<double>(r.bands.count);
    auto fill = [n](BandPowerRatios& b, const std::array<double, 5>& s) {
      b = {s[0] / n, s[1] / n, s[2] / n, s[3] / n, s[4] / n};
    };
    fill(r.bands.ground_truth, gt);
    fill(r.bands.contaminated, ct);
    fill(r.bands.denoised, dn);
  }
  r.levels = summarize_levels(r.pairs);
  return r;
}

EvalReport evaluate(const std::string& method, const Denoiser& denoiser, const std::vector<SemiSyntheticPair>& pairs) {
  std::vector<Segment> outputs;
  std::vector<std::string> errors(pairs.size());
  outputs.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    try {
      outputs.push_back(denoiser(pairs[i].contaminated));
    } catch (const Error& e) {
      errors[i] = e.what();
      outputs.push_back(pairs[i].contaminated);
    }
  }
  EvalReport r = evaluate_outputs(method, pairs, outputs);
  bool any = false;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (errors[i].empty()) continue;
    r.pairs[i].ok = false;
    r.pairs[i].error = errors[i];
    any = true;
  }
  if (any) r.levels = summarize_levels(r.pairs);
  return r;
}

std::pair<std::size_t, std::size_t> best_worst(const EvalReport& report) {
  std::size_t best = 0, worst = 0;
  bool found = false;
  for (const auto& p : report.pairs) {
    if (!p.ok) continue;
    if (!found) {
      best = worst = p.pair_index;
      found = true;
      continue;
    }
    if (p.rrmse_t < report.pairs[best].rrmse_t) best = p.pair_index;
    if (p.rrmse_t > report.pairs[worst].rrmse_t) worst = p.pair_index;
  }
  if (!found) throw InvalidInput("best_worst: report has no successful pairs");
  return {best, worst};
}

void write_eval_csv(const std::filesystem::path& path, const EvalReport& report, std::uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "method,seed,snr_db,pair_index,rrmse_t,rrmse_s,cc\n";
  for (const auto& p : report.pairs) {
    out << report.method << ',' << seed << ',' << format_real(p.snr_db) << ',' << p.pair_index << ',';
    if (p.ok)
      out << format_real(p.rrmse_t) << ',' << format_real(p.rrmse_s) << ',' << format_real(p.cc) << '\n';
    else
      out << "nan,nan,nan\n";
  }
}

std::vector<PairMetrics> read_eval_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t c_snr = t.column("snr_db"), c_idx = t.column("pair_index"), c_t = t.column("rrmse_t"),
                    c_s = t.column("rrmse_s"), c_cc = t.column("cc");
  std::vector<PairMetrics> out;
  for (const auto& row : t.rows) {
    PairMetrics m;
    m.snr_db = parse_real(row[c_snr], path);
    m.pair_index = static_cast<std::size_t>(parse_real(row[c_idx], path));
    m.rrmse_t = parse_real(row[c_t], path);
    m.rrmse_s = parse_real(row[c_s], path);
    m.cc = parse_real(row[c_cc], path);
    m.ok = std::isfinite(m.rrmse_t) && std::isfinite(m.rrmse_s) && std::isfinite(m.cc);
    out.push_back(m);
  }
  return out;
}

void write_eval_json(const std::filesystem::path& path, const EvalReport& report) {
  nlohmann::ordered_json j;
  j["method"] = report.method;
  j["pairs"] = report.pairs.size();
  j["failed"] = report.failed();
  auto levels = nlohmann::ordered_json::array();
  for (const auto& l : report.levels)
    levels.push_back({{"snr_db", l.snr_db},
                      {"count", l.count},
                      {"failed", l.failed},
                      {"rrmse_t_mean", l.mean_rrmse_t},
                      {"rrmse_t_std", l.std_rrmse_t},
                      {"rrmse_s_mean", l.mean_rrmse_s},
                      {"rrmse_s_std", l.std_rrmse_s},
                      {"cc_mean", l.mean_cc},
                      {"cc_std", l.std_cc}});
  j["levels"] = levels;
  if (report.bands.available) {
    auto row = [](const BandPowerRatios& b) {
      nlohmann::ordered_json o;
      const auto a = b.as_array();
      for (std::size_t k = 0; k < 5; ++k) o[std::string(kBandNames[k])] = a[k];
      return o;
    };
    j["band_ratios"] = {{"count", report.bands.count},
                        {"ground_truth", row(report.bands.ground_truth)},
                        {"contaminated", row(report.bands.contaminated)},
                        {"denoised", row(report.bands.denoised)}};
  }
  std::ofstream(path) << j.dump(2) << '\n';
}

}  // namespace eegbench
