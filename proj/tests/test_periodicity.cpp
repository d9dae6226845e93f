#include <complex>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "oxicopd/error.hpp"
#include "oxicopd/periodicity.hpp"

using namespace oxicopd;
using doctest::Approx;

namespace {

std::vector<double> sinusoid(std::size_t n, double f, double fs, double amp = 2.0, double offset = 94.0) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = offset + amp * std::sin(2 * std::numbers::pi * f * static_cast<double>(i) / fs);
  }
  return s;
}

double slope(const std::vector<double>& y, long first, double dt) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = static_cast<double>(first + static_cast<long>(i)) * dt;
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

TEST_CASE("PRSA without anchors") {
  std::vector<double> inc(100);
  for (std::size_t i = 0; i < inc.size(); ++i) inc[i] = 80 + 0.1 * static_cast<double>(i);
  for (const auto& s : {inc, std::vector<double>(100, 95.0)}) {
    const auto r = prsa(s, 1.0);
    CHECK(r.no_anchors);
    CHECK(r.capacity == 0);
    CHECK(r.amplitude == 0);
    CHECK(r.slope_overall == 0);
    CHECK(r.slope_before == 0);
    CHECK(r.slope_after == 0);
  }
}

TEST_CASE("PRSA of a sawtooth reproduces the period template") {
  std::vector<double> s;
  for (int p = 0; p < 50; ++p) {
    for (int k = 0; k < 6; ++k) s.push_back(90 + k);
  }
  const std::size_t d = 10;
  const double fs = 2.0;
  const auto r = prsa(s, fs, d);
  REQUIRE_FALSE(r.no_anchors);
  std::vector<double> tmpl;
  for (long k = -10; k <= 10; ++k) tmpl.push_back(90 + static_cast<double>(((k % 6) + 6) % 6));
  REQUIRE(r.average.size() == tmpl.size());
  for (std::size_t k = 0; k < tmpl.size(); ++k) CHECK(r.average[k] == Approx(tmpl[k]));
  CHECK(r.capacity == Approx((90 + 91 - 95 - 94) / 4.0));
  CHECK(r.amplitude == Approx(5));
  CHECK(r.slope_overall == Approx(slope(tmpl, -10, 1 / fs)));
  CHECK(r.slope_before == Approx(slope({tmpl.begin(), tmpl.begin() + 11}, -10, 1 / fs)));
  CHECK(r.slope_after == Approx(slope({tmpl.begin() + 10, tmpl.end()}, 0, 1 / fs)));
}

TEST_CASE("PRSA slopes mirror under time reversal of a symmetric template") {
  // isolated one-sample dips: one anchor per dip, average symmetric about it
  std::vector<double> s;
  for (int p = 0; p < 30; ++p) {
    s.insert(s.end(), 15, 95.0);
    s.push_back(p % 2 ? 91 : 89);
  }
  s.insert(s.end(), 15, 95.0);
  std::vector<double> rev(s.rbegin(), s.rend());
  const auto a = prsa(s, 1.0);
  const auto b = prsa(rev, 1.0);
  CHECK(b.slope_before == Approx(-a.slope_after));
  CHECK(b.slope_after == Approx(-a.slope_before));
  CHECK(a.slope_before == Approx(-a.slope_after));
  CHECK(a.capacity == Approx(b.capacity));
}

TEST_CASE("periodogram agrees with a direct DFT") {
  const auto s = oracle::uniform_noise(300, 5, 90, 98);
  const auto p = periodogram(s, 1.0);
  double mu = 0;
  for (double v : s) mu += v;
  mu /= static_cast<double>(s.size());
  const auto n = static_cast<double>(s.size());
  for (std::size_t k : {1u, 7u, 60u, 149u, 150u}) {
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      acc += (s[i] - mu) * std::polar(1.0, -2 * std::numbers::pi * static_cast<double>(k * i) / n);
    }
    const double expect = std::norm(acc) / n * (k == 150 ? 1 : 2);
    CHECK(p.power[k] == Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("periodogram total power equals the variance") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = oracle::uniform_noise(1000 + seed, seed, 90, 98);
    const double sd = oracle::pop_sd(s);
    const auto b = integrate_band(periodogram(s, 1.0), 0.014, 0.033);
    CHECK(b.total == Approx(sd * sd).epsilon(1e-9));
  }
}

TEST_CASE("band partition") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = oracle::uniform_noise(3000, seed, 90, 98);
    for (const auto& psd : {periodogram(s, 1.0), welch(s, 1.0)}) {
      const auto b = integrate_band(psd, 0.014, 0.033);
      CHECK(b.band + b.outside == Approx(b.total).epsilon(1e-9));
      CHECK(b.band <= b.total);
    }
  }
}

TEST_CASE("sinusoid band ratios") {
  for (auto method : {PsdMethod::welch, PsdMethod::periodogram}) {
    SpectralParams p;
    p.method = method;
    CHECK(spectral(sinusoid(4096, 0.02, 1.0), 1.0, p).psd_ratio >= 0.99);
    CHECK(spectral(sinusoid(4096, 0.2, 1.0), 1.0, p).psd_ratio <= 0.01);
  }
  const auto b = spectral(sinusoid(4096, 0.02, 1.0), 1.0);
  CHECK(b.psd_peak > 0);
  CHECK(b.psd_band <= b.psd_total);
}

TEST_CASE("constant signal spectrum") {
  const std::vector<double> s(1000, 95.0);
  const auto b = spectral(s, 1.0);
  CHECK(b.psd_total == Approx(0.0));
  CHECK(b.psd_ratio == 0);
  CHECK(b.ac == Approx(95.0 * 95.0));
}

TEST_CASE("spectral preconditions") {
  CHECK_THROWS_AS(spectral(std::vector<double>(63, 95.0), 1.0), Error);
  CHECK_THROWS_AS(spectral(std::vector<double>(500, 95.0), 0.05), Error);
  CHECK_NOTHROW(spectral(std::vector<double>(500, 95.0), 0.066));
}
