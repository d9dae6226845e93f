#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace oxicopd {

struct ComplexityParams {
  std::size_t m = 1;        // embedding dimension for ApEn / SampEn
  double r_factor = 0.25;   // tolerance as a fraction of the population SD
  double ctm_rho = 0.25;
  std::size_t dfa_scale = 20;
};

/// ApEn(m, r) with Chebyshev distance, self-matches included.
double approx_entropy(std::span<const double> signal, std::size_t m, double r);
/// r = r_factor * SD; a constant signal yields 0.
double approx_entropy(std::span<const double> signal, const ComplexityParams& params = {});

struct SampEnResult {
  double value = 0;
  bool capped = false; // no matches at m or m+1; value is the finite fallback
};

/// SampEn(m, r), self-matches excluded. When either match count is zero the
/// fallback ln(n-m) + ln(n-m-1) - ln 2 is returned with `capped` set.
SampEnResult sample_entropy(std::span<const double> signal, std::size_t m, double r);
/// r = r_factor * SD; a constant signal yields 0.
SampEnResult sample_entropy(std::span<const double> signal, const ComplexityParams& params = {});

/// LZ76 phrase count of the sequence binarized at its median (>= median -> 1).
std::size_t lempel_ziv(std::span<const double> signal);
/// LZ76 phrase count (Kaspar-Schuster scan) of a symbol sequence.
std::size_t lz76_phrase_count(std::span<const unsigned char> symbols);

/// Fraction of consecutive first-difference pairs within radius rho of the origin.
double central_tendency(std::span<const double> signal, double rho = 0.25);

/// RMS residual of the integrated, box-wise linearly detrended signal at one scale.
double dfa_fluctuation(std::span<const double> signal, std::size_t scale = 20);
/// Log-log least-squares slope of F(n) over the given scales.
double dfa_exponent(std::span<const double> signal, std::span<const std::size_t> scales);

struct ComplexityBiomarkers {
  double apen = 0;
  double lz = 0;
  double ctm = 0;
  double sampen = 0;
  bool sampen_capped = false;
  double dfa = 0;
};

ComplexityBiomarkers complexity_biomarkers(std::span<const double> signal, const ComplexityParams& params = {});

} // namespace oxicopd
