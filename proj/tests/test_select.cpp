#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "oxicopd/error.hpp"
#include "oxicopd/select.hpp"

using namespace oxicopd;
using doctest::Approx;

namespace {

std::vector<double> seq(int from, int to) {
  std::vector<double> v;
  for (int i = from; i <= to; ++i) v.push_back(i);
  return v;
}

FeatureMatrix matrix_from(const std::vector<std::vector<double>>& cols, const std::vector<int>& labels) {
  FeatureMatrix m;
  for (std::size_t j = 0; j < cols.size(); ++j) m.columns.push_back("f" + std::to_string(j + 1));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    FeatureRow r{"p" + std::to_string(i), 0, labels[i], {}};
    for (const auto& c : cols) r.values.push_back(c[i]);
    m.rows.push_back(std::move(r));
  }
  return m;
}

std::vector<double> to_double(const std::vector<int>& v) { return {v.begin(), v.end()}; }

} // namespace

TEST_CASE("rank-sum examples") {
  CHECK(rank_sum_test(seq(1, 20), seq(1, 20)) >= 0.99);
  CHECK(rank_sum_test(seq(1, 20), seq(21, 40)) < 1e-6);
  CHECK(rank_sum_test(seq(1, 20), seq(21, 40)) > 0);
  CHECK(rank_sum_test(std::vector<double>(5, 1.0), std::vector<double>(7, 1.0)) == 1.0);
  CHECK_THROWS_AS(rank_sum_test(std::vector<double>{}, seq(1, 3)), Error);
  CHECK(rank_sum_test(seq(1, 500), seq(10000, 10500)) > 0);
}

TEST_CASE("rank-sum approximation against exact enumeration at n = 5 + 5") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0, 1);
  double worst = 0;
  for (int t = 0; t < 300; ++t) {
    const double shift = (t % 5) * 0.5;
    std::vector<double> a(5), b(5);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng) + shift;
    const double approx = rank_sum_test(a, b);
    const double exact = oracle::rank_sum_exact(a, b);
    worst = std::max(worst, std::abs(approx - exact));
    CHECK(std::abs(approx - exact) <= 0.02);
  }
  MESSAGE("largest deviation " << worst);
}

TEST_CASE("rank-sum symmetry and range") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<int> d(0, 9);
    std::vector<double> a(1 + rng() % 30), b(1 + rng() % 30);
    for (auto& v : a) v = d(rng);
    for (auto& v : b) v = d(rng) + (t % 3);
    const double p = rank_sum_test(a, b);
    CHECK(p == rank_sum_test(b, a));
    CHECK(p > 0);
    CHECK(p <= 1);
  }
}

TEST_CASE("midranks average ties") {
  CHECK(midranks(std::vector<double>{3, 1, 3, 2}) == std::vector<double>{3.5, 1, 3.5, 2});
}

TEST_CASE("mutual information") {
  SUBCASE("independent fair coins") {
    std::mt19937_64 rng(1);
    std::vector<double> x(10000), y(10000);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = static_cast<double>(rng() % 2);
      y[i] = static_cast<double>(rng() % 2);
    }
    CHECK(mutual_information(x, y) <= 0.01);
  }
  SUBCASE("balanced copy") {
    std::vector<double> x;
    for (int i = 0; i < 100; ++i) x.push_back(i % 2);
    CHECK(mutual_information(x, x) == Approx(std::log(2.0)));
  }
  SUBCASE("hand-computed table") {
    // joint counts (0,0)=3 (0,1)=1 (1,0)=1 (1,1)=3
    const std::vector<double> x{0, 0, 0, 0, 1, 1, 1, 1};
    const std::vector<double> y{0, 0, 0, 1, 0, 1, 1, 1};
    const double expect = 2 * (3.0 / 8) * std::log((3.0 / 8) / 0.25) + 2 * (1.0 / 8) * std::log((1.0 / 8) / 0.25);
    CHECK(mutual_information(x, y) == Approx(expect));
  }
  SUBCASE("factorizing joint gives exactly zero") {
    const std::vector<double> x{0, 0, 1, 1, 0, 0, 1, 1};
    const std::vector<double> y{0, 1, 0, 1, 0, 1, 0, 1};
    CHECK(mutual_information(x, y) == 0);
  }
  SUBCASE("agrees with the map-based oracle and is symmetric") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto x = oracle::uniform_noise(300, seed, 0, 1);
      auto y = oracle::uniform_noise(300, seed + 100, 0, 1);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::round(4 * (y[i] + x[i]));
      const auto cx = discretize(x, 10);
      const auto cy = discretize(y, 10);
      CHECK(cx == oracle::discretize(x, 10));
      CHECK(cy == oracle::discretize(y, 10));
      const double mi = mutual_information(x, y);
      CHECK(mi == Approx(oracle::mutual_information(oracle::discretize(x, 10), oracle::discretize(y, 10))));
      CHECK(mi == Approx(mutual_information(y, x)));
      CHECK(mi >= 0);
    }
  }
}

TEST_CASE("mRMR suppresses a redundant copy") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 1);
  const std::size_t n = 600;
  std::vector<int> c(n);
  std::vector<double> f1(n), f3(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = static_cast<int>(i % 2);
    f1[i] = c[i] + 0.4 * g(rng);
    f3[i] = c[i] + 0.8 * g(rng);
  }
  const auto m = matrix_from({f1, f1, f3}, c);
  const auto r = mrmr_select(m, 2);
  CHECK(r.selected == std::vector<std::string>{"f1", "f3"});
  CHECK(r.phi[0] == Approx(r.relevance[0]));
  CHECK(r.redundancy[0] == 0);
}

TEST_CASE("mRMR invariants") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 120 + static_cast<std::size_t>(trial) * 7;
    const std::size_t p = 3 + static_cast<std::size_t>(trial) % 4;
    std::vector<int> c(n);
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = static_cast<int>(rng() % 2);
      for (std::size_t j = 0; j < p; ++j) {
        cols[j][i] = j % 3 == 2 ? std::round(2 * g(rng) + c[i]) : c[i] * (0.3 * static_cast<double>(j)) + g(rng);
      }
    }
    const auto m = matrix_from(cols, c);

    // all columns, each exactly once
    const auto all = mrmr_select(m, p);
    std::vector<std::size_t> sorted(all.indices);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < p; ++j) CHECK(sorted[j] == j);

    // k = 1 is the most relevant column
    std::vector<std::vector<int>> codes;
    for (const auto& col : cols) codes.push_back(oracle::discretize(col, 10));
    std::vector<double> rel;
    for (const auto& code : codes) rel.push_back(oracle::mutual_information(code, c));
    const auto top = static_cast<std::size_t>(std::max_element(rel.begin(), rel.end()) - rel.begin());
    CHECK(mrmr_select(m, 1).indices[0] == top);

    // step-by-step recomputation of the greedy score for k <= 3
    const std::size_t k = std::min<std::size_t>(3, p);
    const auto r = mrmr_select(m, k);
    std::vector<std::size_t> chosen;
    for (std::size_t step = 0; step < k; ++step) {
      std::size_t best = p;
      double best_score = 0;
      for (std::size_t j = 0; j < p; ++j) {
        if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
        double red = 0;
        for (auto s : chosen) red += oracle::mutual_information(codes[j], codes[s]);
        const double score = rel[j] - (chosen.empty() ? 0 : red / static_cast<double>(chosen.size()));
        if (best == p || score > best_score + 1e-12) {
          best = j;
          best_score = score;
        }
      }
      chosen.push_back(best);
      CHECK(r.indices[step] == best);
      CHECK(r.phi[step] == Approx(best_score));
    }

    // monotone transforms leave the selection unchanged
    auto warped = cols;
    for (auto& col : warped) {
      for (auto& v : col) v = std::exp(v) * 3 - 1;
    }
    CHECK(mrmr_select(matrix_from(warped, c), k).indices == r.indices);
    CHECK(mrmr_select(m, k, 10, 4).indices == r.indices);
  }
  CHECK_THROWS_AS(mrmr_select(matrix_from({{1, 2}}, {0, 1}), 0), Error);
  CHECK_THROWS_AS(mrmr_select(matrix_from({{1, 2}}, {0, 1}), 2), Error);
}

TEST_CASE("screening report") {
  std::vector<int> c;
  std::vector<double> strong, weak;
  for (int i = 0; i < 60; ++i) {
    c.push_back(i % 2);
    strong.push_back(i % 2 ? 100 + i : i);
    weak.push_back(i % 7);
  }
  const auto rep = screen_features(matrix_from({weak, strong}, c));
  REQUIRE(rep.entries.size() == 2);
  CHECK(rep.entries[0].rank == 1);
  CHECK(rep.entries[0].feature == "f2");
  CHECK(rep.entries[1].rank == 2);
  CHECK(rep.entries[0].p_value < 1e-6);
  std::ostringstream out;
  write_screening(out, rep);
  CHECK(out.str().rfind("feature,p_value,rank,", 0) == 0);
  CHECK_THROWS_AS(screen_features(matrix_from({weak}, std::vector<int>(60, 1))), Error);

  MrmrResult r{{"a"}, {0}, {0.5}, {0.5}, {0}};
  std::ostringstream t;
  write_mrmr(t, r);
  CHECK(t.str() == "step,feature,phi,relevance\n1,a,0.5,0.5\n");
}
