#include "eegbench/emd.hpp"

#include <cmath>

namespace eegbench {

void EmdConfig::validate() const {
  if (max_imfs < 1) throw SpecError("emd: max_imfs must be >= 1");
  if (!(sd_threshold > 0)) throw SpecError("emd: sd_threshold must be > 0");
  if (max_sifts < 1) throw SpecError("emd: max_sifts must be >= 1");
}

namespace {

struct Extrema {
  std::vector<double> max_t, max_v, min_t, min_v;
};

Extrema find_extrema(std::span<const double> x) {
  Extrema e;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (x[i] > x[i - 1] && x[i] >= x[i + 1]) {
      e.max_t.push_back(static_cast<double>(i));
      e.max_v.push_back(x[i]);
    } else if (x[i] < x[i - 1] && x[i] <= x[i + 1]) {
      e.min_t.push_back(static_cast<double>(i));
      e.min_v.push_back(x[i]);
    }
  }
  return e;
}

// Reflects the two extrema nearest each end about the first and last sample.
void mirror(std::vector<double>& t, std::vector<double>& v, double last) {
  const std::size_t k = std::min<std::size_t>(2, t.size());
  std::vector<double> ts, vs;
  for (std::size_t i = k; i-- > 0;) {
    if (t[i] == 0) continue;
    ts.push_back(-t[i]);
    vs.push_back(v[i]);
  }
  ts.insert(ts.end(), t.begin(), t.end());
  vs.insert(vs.end(), v.begin(), v.end());
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = t.size() - 1 - i;
    if (t[j] == last) continue;
    ts.push_back(2 * last - t[j]);
    vs.push_back(v[j]);
  }
  t = std::move(ts);
  v = std::move(vs);
}

}  // namespace

ExtremaCount count_extrema(std::span<const double> x) {
  const Extrema e = find_extrema(x);
  ExtremaCount c{e.max_t.size(), e.min_t.size(), 0};
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    if ((x[i] < 0) != (x[i + 1] < 0)) ++c.zero_crossings;
  return c;
}

std::vector<double> natural_spline(std::span<const double> xs, std::span<const double> ys, std::size_t n) {
  const std::size_t m = xs.size();
  if (m != ys.size() || m < 2) throw InvalidInput("natural_spline: need at least two matching knots");
  // Second derivatives from the tridiagonal system, natural end conditions.
  std::vector<double> h(m - 1), m2(m, 0.0);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    h[i] = xs[i + 1] - xs[i];
    if (!(h[i] > 0)) throw InvalidInput("natural_spline: knots must be strictly ascending");
  }
  if (m > 2) {
    const std::size_t k = m - 2;
    std::vector<double> diag(k), rhs(k), upper(k);
    for (std::size_t i = 0; i < k; ++i) {
      diag[i] = 2 * (h[i] + h[i + 1]);
      upper[i] = h[i + 1];
      rhs[i] = 6 * ((ys[i + 2] - ys[i + 1]) / h[i + 1] - (ys[i + 1] - ys[i]) / h[i]);
    }
    for (std::size_t i = 1; i < k; ++i) {
      const double w = h[i] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = k; i-- > 0;) m2[i + 1] = (rhs[i] - (i + 1 < k ? upper[i] * m2[i + 2] : 0.0)) / diag[i];
  }
  std::vector<double> out(n);
  std::size_t seg = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double x = static_cast<double>(t);
    while (seg + 2 < m && x > xs[seg + 1]) ++seg;
    const double hi = h[seg];
    const double a = (xs[seg + 1] - x) / hi;
    const double b = (x - xs[seg]) / hi;
    out[t] = a * ys[seg] + b * ys[seg + 1] +
             ((a * a * a - a) * m2[seg] + (b * b * b - b) * m2[seg + 1]) * hi * hi / 6.0;
  }
  return out;
}

ImfSet emd(const Segment& s, const EmdConfig& cfg) {
  cfg.validate();
  const std::size_t n = s.size();
  const double last = static_cast<double>(n - 1);
  {
    const ExtremaCount c = count_extrema(s.view());
    if (c.maxima + c.minima < 4)
      throw DecompositionError("emd: signal has " + std::to_string(c.maxima + c.minima) +
                               " extrema, at least 4 are needed");
  }
  std::vector<double> r = s.samples();
  std::vector<Segment> imfs;
  while (imfs.size() < cfg.max_imfs) {
    Extrema e = find_extrema(r);
    if (e.max_t.empty() || e.min_t.empty()) break;  // monotone residual
    std::vector<double> h = r;
    for (std::size_t it = 0; it < cfg.max_sifts; ++it) {
      e = find_extrema(h);
      if (e.max_t.empty() || e.min_t.empty()) break;
      mirror(e.max_t, e.max_v, last);
      mirror(e.min_t, e.min_v, last);
      const auto upper = natural_spline(e.max_t, e.max_v, n);
      const auto lower = natural_spline(e.min_t, e.min_v, n);
      double num = 0, den = 0;
      for (std::size_t t = 0; t < n; ++t) {
        const double m = 0.5 * (upper[t] + lower[t]);
        num += m * m;
        den += h[t] * h[t];
        h[t] -= m;
      }
      const ExtremaCount c = count_extrema(h);
      const std::size_t ext = c.maxima + c.minima;
      const std::size_t diff = ext > c.zero_crossings ? ext - c.zero_crossings : c.zero_crossings - ext;
      if (den > 0 && num / den < cfg.sd_threshold && diff <= 1) break;
    }
    for (std::size_t t = 0; t < n; ++t) r[t] -= h[t];
    imfs.emplace_back(std::move(h), s.fs());
  }
  return {std::move(imfs), Segment(std::move(r), s.fs())};
}

}  // namespace eegbench
