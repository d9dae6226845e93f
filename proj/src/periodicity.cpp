#include "oxicopd/periodicity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oxicopd/error.hpp"
#include "oxicopd/fft.hpp"
#include "oxicopd/summary_stats.hpp"

namespace oxicopd {

namespace {

double ls_slope(std::span<const double> y, double dt) {
  const auto n = static_cast<double>(y.size());
  if (y.size() < 2) return 0.0;
  const double x_mean = (n - 1) / 2;
  const double y_mean = stats::mean(y);
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double dx = static_cast<double>(k) - x_mean;
    sxy += dx * (y[k] - y_mean);
    sxx += dx * dx;
  }
  return sxy / sxx / dt;
}

} // namespace

PrsaResult prsa(std::span<const double> s, double fs, std::size_t d) {
  if (d < 2) throw Error("PRSA fragment half-length must be >= 2");
  PrsaResult r;
  const std::size_t width = 2 * d + 1;
  r.average.assign(width, 0.0);
  std::size_t anchors = 0;
  if (s.size() >= width) {
    for (std::size_t i = d; i + d < s.size(); ++i) {
      if (!(s[i] < s[i - 1])) continue;
      ++anchors;
      for (std::size_t k = 0; k < width; ++k) r.average[k] += s[i - d + k];
    }
  }
  if (anchors == 0) {
    r.no_anchors = true;
    std::fill(r.average.begin(), r.average.end(), 0.0);
    return r;
  }
  for (auto& v : r.average) v /= static_cast<double>(anchors);
  const auto& x = r.average;
  const auto at = [&](long offset) { return x[static_cast<std::size_t>(static_cast<long>(d) + offset)]; };
  r.capacity = (at(0) + at(1) - at(-1) - at(-2)) / 4.0;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  r.amplitude = *hi - *lo;
  const double dt = 1.0 / fs;
  const std::span<const double> all(x);
  r.slope_overall = ls_slope(all, dt);
  r.slope_before = ls_slope(all.first(d + 1), dt);
  r.slope_after = ls_slope(all.subspan(d), dt);
  return r;
}

Psd periodogram(std::span<const double> s, double fs) {
  if (s.empty()) throw Error("periodogram of an empty signal");
  const double mu = stats::mean(s);
  std::vector<double> x(s.begin(), s.end());
  for (auto& v : x) v -= mu;
  const auto spec = real_dft(x);
  const std::size_t n = x.size();
  Psd p;
  p.df = fs / static_cast<double>(n);
  p.power.resize(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    double v = std::norm(spec[k]) / (static_cast<double>(n) * fs);
    const bool nyquist = n % 2 == 0 && k == n / 2;
    if (k != 0 && !nyquist) v *= 2.0;
    p.power[k] = v;
  }
  return p;
}

Psd welch(std::span<const double> s, double fs, std::size_t segment, double overlap) {
  if (s.empty()) throw Error("welch of an empty signal");
  if (!(overlap >= 0 && overlap < 1)) throw Error("welch overlap must be in [0, 1)");
  const std::size_t len = std::min(segment, s.size());
  const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(len) * (1 - overlap))));
  // periodic Hann taper
  std::vector<double> w(len);
  double w_energy = 0;
  for (std::size_t i = 0; i < len; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len));
    w_energy += w[i] * w[i];
  }
  Psd p;
  p.df = fs / static_cast<double>(len);
  p.power.assign(len / 2 + 1, 0.0);
  std::vector<double> buf(len);
  std::size_t segments = 0;
  for (std::size_t start = 0; start + len <= s.size(); start += step) {
    const auto seg = s.subspan(start, len);
    const double mu = stats::mean(seg);
    for (std::size_t i = 0; i < len; ++i) buf[i] = (seg[i] - mu) * w[i];
    const auto spec = real_dft(buf);
    for (std::size_t k = 0; k < spec.size(); ++k) {
      double v = std::norm(spec[k]) / (fs * w_energy);
      const bool nyquist = len % 2 == 0 && k == len / 2;
      if (k != 0 && !nyquist) v *= 2.0;
      p.power[k] += v;
    }
    ++segments;
  }
  for (auto& v : p.power) v /= static_cast<double>(segments);
  return p;
}

BandIntegrals integrate_band(const Psd& psd, double low, double high) {
  BandIntegrals b;
  for (std::size_t k = 1; k < psd.power.size(); ++k) {
    const double f = psd.frequency(k);
    const double area = psd.power[k] * psd.df;
    b.total += area;
    if (f >= low && f <= high) {
      b.band += area;
      b.peak = std::max(b.peak, psd.power[k]);
    } else {
      b.outside += area;
    }
  }
  return b;
}

double lag1_autocorrelation(std::span<const double> s) {
  if (s.size() < 2) throw Error("lag-1 autocorrelation needs at least 2 samples");
  double acc = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) acc += s[i] * s[i + 1];
  return acc / static_cast<double>(s.size() - 1);
}

SpectralBiomarkers spectral(std::span<const double> s, double fs, const SpectralParams& p) {
  if (s.size() < 64) throw Error("spectral biomarkers need at least 64 samples");
  if (fs / 2 < p.band_high) throw Error("band upper edge lies above the Nyquist frequency");
  SpectralBiomarkers b;
  b.ac = lag1_autocorrelation(s);
  const Psd psd = p.method == PsdMethod::welch ? welch(s, fs, p.segment, p.overlap) : periodogram(s, fs);
  const auto bands = integrate_band(psd, p.band_low, p.band_high);
  b.psd_total = bands.total;
  b.psd_band = bands.band;
  b.psd_peak = bands.peak;
  b.psd_ratio = bands.total > 0 ? bands.band / bands.total : 0.0;
  return b;
}

} // namespace oxicopd
