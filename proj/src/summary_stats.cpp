#include "oxicopd/summary_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oxicopd/error.hpp"

namespace oxicopd::stats {

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::pair<double, double> mean_sd(std::span<const double> v) {
  const double mu = mean(v);
  if (v.size() < 2) return {mu, 0.0};
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return {mu, std::sqrt(acc / static_cast<double>(v.size()))};
}

double pop_sd(std::span<const double> v) { return mean_sd(v).second; }

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double median(std::span<const double> v) { return percentile(v, 50.0); }

double percentile(std::span<const double> v, double q) {
  if (v.empty()) throw Error("percentile of an empty sequence");
  if (!(q >= 0.0 && q <= 100.0)) throw Error("percentile rank must be in [0, 100]");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const double pos = q / 100.0 * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, s.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return s[lo];
  return s[lo] + frac * (s[hi] - s[lo]);
}

} // namespace oxicopd::stats
