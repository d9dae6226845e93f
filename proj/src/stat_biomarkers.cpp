#include "oxicopd/stat_biomarkers.hpp"

#include <algorithm>
#include <cmath>

#include "oxicopd/error.hpp"
#include "oxicopd/summary_stats.hpp"

namespace oxicopd {

std::size_t zero_crossings(std::span<const double> s, double level) {
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double a = s[i] - level;
    const double b = s[i + 1] - level;
    if ((a < 0 && b > 0) || (a > 0 && b < 0)) ++count;
  }
  return count;
}

std::optional<double> delta_index(std::span<const double> s, double fs, double segment_s) {
  const auto seg = static_cast<std::size_t>(std::llround(segment_s * fs));
  if (seg == 0) throw Error("delta index segment must hold at least one sample");
  const std::size_t count = s.size() / seg;
  if (count < 2) return std::nullopt;
  std::vector<double> means(count);
  for (std::size_t k = 0; k < count; ++k) means[k] = stats::mean(s.subspan(k * seg, seg));
  double acc = 0;
  for (std::size_t k = 0; k + 1 < count; ++k) acc += std::abs(means[k + 1] - means[k]);
  return acc / static_cast<double>(count - 1);
}

StatBiomarkers stat_biomarkers(std::span<const double> s, double fs, const StatParams& p) {
  if (s.empty()) throw Error("stat_biomarkers: empty signal");
  StatBiomarkers b;
  std::tie(b.av, b.sd) = stats::mean_sd(s);
  b.med = stats::median(s);
  const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
  b.min = *lo;
  b.rg = *hi - *lo;
  b.px = stats::percentile(s, p.percentile);
  const double cut = b.med - p.below_median;
  const auto below = std::count_if(s.begin(), s.end(), [&](double v) { return v <= cut; });
  b.mx = 100.0 * static_cast<double>(below) / static_cast<double>(s.size());
  b.zc = static_cast<double>(zero_crossings(s, p.zc_level.value_or(b.med)));
  if (const auto di = delta_index(s, fs, p.delta_index_s)) {
    b.delta_index = *di;
  } else {
    b.delta_index_short = true;
  }
  return b;
}

} // namespace oxicopd
