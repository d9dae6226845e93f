#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace oxicopd {

struct PrsaResult {
  double capacity = 0;
  double amplitude = 0;
  double slope_overall = 0; // %/s
  double slope_before = 0;
  double slope_after = 0;
  bool no_anchors = false;
  std::vector<double> average; // 2d + 1 values, offsets -d..d
};

/// Phase-rectified signal averaging around decrease anchors (s[i] < s[i-1]).
PrsaResult prsa(std::span<const double> signal, double fs, std::size_t d = 10);

enum class PsdMethod { welch, periodogram };

struct SpectralParams {
  double band_low = 0.014; // Hz
  double band_high = 0.033;
  PsdMethod method = PsdMethod::welch;
  std::size_t segment = 512;
  double overlap = 0.5;
};

/// One-sided power spectral density, %^2/Hz, on a uniform grid k * df.
struct Psd {
  double df = 0;
  std::vector<double> power;
  double frequency(std::size_t k) const { return static_cast<double>(k) * df; }
};

/// |DFT|^2 / (n fs) of the mean-removed signal, doubled for interior bins.
Psd periodogram(std::span<const double> signal, double fs);
/// Averaged Hann-tapered periodograms of mean-removed segments.
Psd welch(std::span<const double> signal, double fs, std::size_t segment = 512, double overlap = 0.5);

struct BandIntegrals {
  double total = 0; // (0, fs/2]
  double band = 0;  // [low, high]
  double outside = 0;
  double peak = 0;  // max PSD inside the band
};

BandIntegrals integrate_band(const Psd& psd, double low, double high);

struct SpectralBiomarkers {
  double ac = 0;
  double psd_total = 0, psd_band = 0, psd_ratio = 0, psd_peak = 0;
};

/// Mean of the lag-1 products s[i] * s[i+1] (mean not removed).
double lag1_autocorrelation(std::span<const double> signal);

SpectralBiomarkers spectral(std::span<const double> signal, double fs, const SpectralParams& params = {});

} // namespace oxicopd
