#include "oxicopd/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "oxicopd/error.hpp"
#include "oxicopd/parallel.hpp"
#include "oxicopd/summary_stats.hpp"
#include "oxicopd/text.hpp"

namespace oxicopd {

std::vector<double> midranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double rank_sum_test(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error("rank-sum test needs two non-empty groups");
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  const auto ranks = midranks(all);
  const auto n1 = static_cast<double>(a.size());
  const auto n2 = static_cast<double>(b.size());
  const double n = n1 + n2;
  double r1 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) r1 += ranks[i];
  const double u = r1 - n1 * (n1 + 1) / 2;

  std::vector<double> sorted(all);
  std::sort(sorted.begin(), sorted.end());
  double ties = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  const double var = n1 * n2 / 12.0 * ((n + 1) - ties / (n * (n - 1)));
  if (!(var > 0)) return 1.0;
  const double dev = std::max(0.0, std::abs(u - n1 * n2 / 2) - 0.5);
  const double p = std::erfc(dev / std::sqrt(var) / std::sqrt(2.0));
  return std::clamp(p, std::numeric_limits<double>::denorm_min(), 1.0);
}

std::vector<int> discretize(std::span<const double> x, std::size_t bins) {
  if (bins < 2) throw Error("MI needs at least 2 bins");
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::size_t distinct = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || x[order[k]] != x[order[k - 1]]) ++distinct;
  }
  std::vector<int> codes(n);
  int category = -1;
  std::size_t first = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || x[order[k]] != x[order[k - 1]]) {
      ++category;
      first = k;
    }
    codes[order[k]] = distinct <= bins ? category : static_cast<int>(first * bins / n);
  }
  return codes;
}

double mutual_information_codes(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error("MI needs equal-length variables");
  if (a.empty()) return 0;
  const int ka = *std::max_element(a.begin(), a.end()) + 1;
  const int kb = *std::max_element(b.begin(), b.end()) + 1;
  std::vector<double> joint(static_cast<std::size_t>(ka * kb), 0.0), pa(static_cast<std::size_t>(ka), 0.0),
      pb(static_cast<std::size_t>(kb), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[static_cast<std::size_t>(a[i] * kb + b[i])] += 1;
    pa[static_cast<std::size_t>(a[i])] += 1;
    pb[static_cast<std::size_t>(b[i])] += 1;
  }
  const auto n = static_cast<double>(a.size());
  double mi = 0;
  for (int i = 0; i < ka; ++i) {
    for (int j = 0; j < kb; ++j) {
      const double c = joint[static_cast<std::size_t>(i * kb + j)];
      if (c == 0) continue;
      mi += c / n * std::log(c * n / (pa[static_cast<std::size_t>(i)] * pb[static_cast<std::size_t>(j)]));
    }
  }
  return std::max(0.0, mi);
}

double mutual_information(std::span<const double> x, std::span<const double> y, std::size_t bins) {
  if (x.size() != y.size() || x.size() < 2) throw Error("MI needs two equal-length variables of length >= 2");
  const auto a = discretize(x, bins);
  const auto b = discretize(y, bins);
  return mutual_information_codes(a, b);
}

MrmrResult mrmr_select(const FeatureMatrix& m, std::size_t k, std::size_t bins, std::size_t jobs) {
  const std::size_t p = m.columns.size();
  if (k == 0) throw Error("mRMR needs k >= 1");
  if (k > p) throw Error("mRMR k exceeds the column count");
  if (m.rows.size() < 2) throw Error("mRMR needs at least two rows");

  std::vector<std::vector<int>> codes(p);
  parallel_for(p, jobs, [&](std::size_t j) { codes[j] = discretize(m.column(j), bins); });
  std::vector<int> labels = m.labels();
  std::vector<double> relevance(p);
  parallel_for(p, jobs, [&](std::size_t j) { relevance[j] = mutual_information_codes(codes[j], labels); });

  MrmrResult r;
  std::vector<bool> taken(p, false);
  std::vector<double> redundancy_sum(p, 0.0);
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t best = p;
    double best_score = 0;
    for (std::size_t j = 0; j < p; ++j) {
      if (taken[j]) continue;
      const double red = step == 0 ? 0.0 : redundancy_sum[j] / static_cast<double>(step);
      const double score = relevance[j] - red;
      if (best == p || score > best_score) {
        best = j;
        best_score = score;
      }
    }
    taken[best] = true;
    r.indices.push_back(best);
    r.selected.push_back(m.columns[best]);
    r.phi.push_back(best_score);
    r.relevance.push_back(relevance[best]);
    r.redundancy.push_back(relevance[best] - best_score);
    if (step + 1 == k) break;
    parallel_for(p, jobs, [&](std::size_t j) {
      if (!taken[j]) redundancy_sum[j] += mutual_information_codes(codes[j], codes[best]);
    });
  }
  return r;
}

ScreeningReport screen_features(const FeatureMatrix& m) {
  ScreeningReport rep;
  const auto labels = m.labels();
  const auto copd_rows = std::count(labels.begin(), labels.end(), 1);
  if (copd_rows == 0 || copd_rows == static_cast<std::ptrdiff_t>(labels.size())) {
    throw Error("screening needs rows of both classes");
  }
  for (std::size_t j = 0; j < m.columns.size(); ++j) {
    std::vector<double> copd, other;
    for (std::size_t i = 0; i < m.rows.size(); ++i) (labels[i] == 1 ? copd : other).push_back(m.rows[i].values[j]);
    ScreeningEntry e;
    e.feature = m.columns[j];
    e.p_value = rank_sum_test(copd, other);
    e.median_copd = stats::median(copd);
    e.iqr_copd = stats::percentile(copd, 75) - stats::percentile(copd, 25);
    e.median_non_copd = stats::median(other);
    e.iqr_non_copd = stats::percentile(other, 75) - stats::percentile(other, 25);
    rep.entries.push_back(std::move(e));
  }
  std::vector<std::size_t> order(rep.entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rep.entries[a].p_value < rep.entries[b].p_value; });
  std::vector<ScreeningEntry> sorted;
  sorted.reserve(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    sorted.push_back(std::move(rep.entries[order[r]]));
    sorted.back().rank = r + 1;
  }
  rep.entries = std::move(sorted);
  return rep;
}

void write_screening(std::ostream& out, const ScreeningReport& rep) {
  using text::format_double;
  out << "feature,p_value,rank,median_copd,iqr_copd,median_non_copd,iqr_non_copd,unit\n";
  for (const auto& e : rep.entries) {
    out << e.feature << ',' << format_double(e.p_value) << ',' << e.rank << ',' << format_double(e.median_copd) << ','
        << format_double(e.iqr_copd) << ',' << format_double(e.median_non_copd) << ','
        << format_double(e.iqr_non_copd) << ',' << rep.unit << '\n';
  }
}

void write_mrmr(std::ostream& out, const MrmrResult& r) {
  using text::format_double;
  out << "step,feature,phi,relevance\n";
  for (std::size_t i = 0; i < r.selected.size(); ++i) {
    out << i + 1 << ',' << r.selected[i] << ',' << format_double(r.phi[i]) << ',' << format_double(r.relevance[i])
        << '\n';
  }
}

} // namespace oxicopd
