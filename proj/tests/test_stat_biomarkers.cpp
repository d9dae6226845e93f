#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "oxicopd/stat_biomarkers.hpp"

using namespace oxicopd;
using doctest::Approx;

TEST_CASE("constant signal") {
  const std::vector<double> s(600, 95.0);
  const auto b = stat_biomarkers(s, 1.0);
  CHECK(b.av == 95);
  CHECK(b.med == 95);
  CHECK(b.min == 95);
  CHECK(b.sd == 0);
  CHECK(b.rg == 0);
  CHECK(b.mx == 0);
  CHECK(b.zc == 0);
  CHECK(b.delta_index == 0);
  CHECK_FALSE(b.delta_index_short);
}

TEST_CASE("alternating 90/96 crosses its median at every step") {
  std::vector<double> s;
  for (int i = 0; i < 101; ++i) s.push_back(i % 2 ? 96 : 90);
  const auto b = stat_biomarkers(s, 1.0);
  CHECK(b.med == 90);
  std::vector<double> even(100);
  for (std::size_t i = 0; i < 100; ++i) even[i] = i % 2 ? 96 : 90;
  const auto e = stat_biomarkers(even, 1.0);
  CHECK(e.med == 93);
  CHECK(e.zc == 99);
  std::size_t direct = 0;
  for (std::size_t i = 0; i + 1 < even.size(); ++i) direct += (even[i] - 93) * (even[i + 1] - 93) < 0 ? 1 : 0;
  CHECK(e.zc == static_cast<double>(direct));
}

TEST_CASE("samples on the level are not crossings") {
  CHECK(zero_crossings(std::vector<double>{92, 93, 94}, 93) == 0);
  CHECK(zero_crossings(std::vector<double>{92, 94, 92}, 93) == 2);
}

TEST_CASE("delta index") {
  std::vector<double> s;
  for (int block = 0; block < 20; ++block) s.insert(s.end(), 12, block % 2 ? 92.0 : 96.0);
  CHECK(stat_biomarkers(s, 1.0).delta_index == 4);
  s.resize(s.size() + 5, 90.0); // partial tail dropped
  CHECK(*delta_index(s, 1.0, 12) == 4);

  const std::vector<double> short_sig(20, 95.0);
  const auto b = stat_biomarkers(short_sig, 1.0);
  CHECK(b.delta_index == 0);
  CHECK(b.delta_index_short);
  CHECK_FALSE(delta_index(short_sig, 1.0, 12).has_value());
}

TEST_CASE("percentile and below-median fraction") {
  std::vector<double> s;
  for (int i = 0; i <= 100; ++i) s.push_back(80 + 0.2 * i);
  StatParams p;
  p.percentile = 0;
  CHECK(stat_biomarkers(s, 1.0, p).px == 80);
  p.percentile = 100;
  CHECK(stat_biomarkers(s, 1.0, p).px == Approx(100));
  p.percentile = 50;
  CHECK(stat_biomarkers(s, 1.0, p).px == Approx(90));
  // median 90, samples <= 88 are 80..88 in steps of 0.2 -> 41 samples
  const auto b = stat_biomarkers(s, 1.0);
  CHECK(b.mx == Approx(100.0 * 41 / 101));
}

TEST_CASE("shift equivariance") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = oracle::uniform_noise(500, rng(), 85, 99);
    const double c = -5 + static_cast<double>(trial) * 0.2;
    std::vector<double> t(s);
    for (auto& v : t) v += c;
    const auto a = stat_biomarkers(s, 1.0);
    const auto b = stat_biomarkers(t, 1.0);
    CHECK(b.av == Approx(a.av + c));
    CHECK(b.med == Approx(a.med + c));
    CHECK(b.min == Approx(a.min + c));
    CHECK(b.px == Approx(a.px + c));
    CHECK(b.sd == Approx(a.sd));
    CHECK(b.rg == Approx(a.rg));
    CHECK(b.mx == Approx(a.mx));
    CHECK(b.delta_index == Approx(a.delta_index));
    CHECK(b.zc == a.zc);
    CHECK(a.sd == Approx(oracle::pop_sd(s)));
    CHECK(a.min <= a.px);
    CHECK(a.px <= a.med);
    CHECK(a.mx >= 0);
    CHECK(a.mx <= 100);
  }
}
