#include "oxicopd/desat.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

#include "oxicopd/error.hpp"
#include "oxicopd/summary_stats.hpp"
#include "oxicopd/text.hpp"

namespace oxicopd {

namespace {
constexpr double kEps = 1e-9;
}

DesaturationEvent make_event(std::span<const double> signal, double fs, std::size_t start, std::size_t min_idx,
                             std::size_t end, double baseline) {
  DesaturationEvent e;
  e.start_idx = start;
  e.min_idx = min_idx;
  e.end_idx = end;
  e.baseline = baseline;
  e.min_value = signal[min_idx];
  e.duration_s = static_cast<double>(end - start) / fs;
  e.depth_max = baseline - e.min_value;
  e.depth_100 = 100.0 - e.min_value;
  // a minimum on the first sample is treated as a one-sample fall
  e.slope = min_idx == start ? e.depth_max * fs : e.depth_max / (static_cast<double>(min_idx - start) / fs);
  double area_max = 0, area_100 = 0;
  for (std::size_t i = start; i < end; ++i) {
    area_max += baseline - signal[i];
    area_100 += 100.0 - signal[i];
  }
  e.area_max = area_max / fs;
  e.area_100 = area_100 / fs;
  return e;
}

std::vector<DesaturationEvent> detect_relative(std::span<const double> s, double fs, double threshold,
                                               double max_length_s) {
  if (!(fs > 0)) throw Error("fs must be positive");
  const std::size_t n = s.size();
  const auto cap = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(max_length_s * fs + kEps)));
  std::vector<DesaturationEvent> events;
  // candidate baselines, values decreasing front to back; ties keep the later index
  std::deque<std::size_t> maxima;
  std::size_t resume = 0;
  for (std::size_t j = 1; j < n; ++j) {
    const std::size_t prev = j - 1;
    if (prev >= resume) {
      while (!maxima.empty() && s[maxima.back()] <= s[prev]) maxima.pop_back();
      maxima.push_back(prev);
    }
    while (!maxima.empty() && maxima.front() + cap <= j) maxima.pop_front();
    if (maxima.empty()) continue;
    const std::size_t start = maxima.front();
    const double baseline = s[start];
    if (baseline - s[j] < threshold - kEps) continue;

    const std::size_t limit = std::min(n, start + cap);
    std::size_t end = j + 1;
    while (end < limit && s[end] < baseline - threshold - kEps) ++end;
    end = std::min(end, limit);
    const auto min_it = std::min_element(s.begin() + static_cast<std::ptrdiff_t>(start),
                                         s.begin() + static_cast<std::ptrdiff_t>(end));
    events.push_back(make_event(s, fs, start, static_cast<std::size_t>(min_it - s.begin()), end, baseline));

    // the recovery sample may serve as the next baseline
    resume = end;
    maxima.clear();
    j = end;
  }
  return events;
}

std::vector<DesaturationEvent> detect_hard(std::span<const double> s, double fs, double level,
                                           std::size_t min_samples) {
  if (!(fs > 0)) throw Error("fs must be positive");
  std::vector<DesaturationEvent> events;
  const std::size_t n = s.size();
  std::size_t i = 0;
  while (i < n) {
    if (!(s[i] < level)) {
      ++i;
      continue;
    }
    std::size_t end = i;
    std::size_t min_idx = i;
    while (end < n && s[end] < level) {
      if (s[end] < s[min_idx]) min_idx = end;
      ++end;
    }
    if (end - i >= std::max<std::size_t>(1, min_samples)) events.push_back(make_event(s, fs, i, min_idx, end, level));
    i = end;
  }
  return events;
}

std::vector<DesaturationEvent> detect_hard(std::span<const double> s, double fs) {
  if (s.empty()) return {};
  return detect_hard(s, fs, stats::median(s));
}

DesatBiomarkers desat_biomarkers(std::span<const DesaturationEvent> events, std::span<const double> signal, double fs) {
  DesatBiomarkers b;
  if (events.empty() || signal.empty()) return b;
  const double hours = static_cast<double>(signal.size()) / fs / 3600.0;
  b.odi = static_cast<double>(events.size()) / hours;

  const std::size_t m = events.size();
  std::vector<double> dl(m), ddmax(m), dd100(m), ds(m), damax(m), da100(m);
  for (std::size_t i = 0; i < m; ++i) {
    dl[i] = events[i].duration_s;
    ddmax[i] = events[i].depth_max;
    dd100[i] = events[i].depth_100;
    ds[i] = events[i].slope;
    damax[i] = events[i].area_max;
    da100[i] = events[i].area_100;
  }
  std::tie(b.dl_mean, b.dl_sd) = stats::mean_sd(dl);
  std::tie(b.ddmax_mean, b.ddmax_sd) = stats::mean_sd(ddmax);
  std::tie(b.dd100_mean, b.dd100_sd) = stats::mean_sd(dd100);
  std::tie(b.ds_mean, b.ds_sd) = stats::mean_sd(ds);
  std::tie(b.damax_mean, b.damax_sd) = stats::mean_sd(damax);
  std::tie(b.da100_mean, b.da100_sd) = stats::mean_sd(da100);

  if (m >= 2) {
    std::vector<double> gaps(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      gaps[i] = (static_cast<double>(events[i + 1].start_idx) - static_cast<double>(events[i].end_idx)) / fs;
    }
    std::tie(b.td_mean, b.td_sd) = stats::mean_sd(gaps);
  }
  return b;
}

HypoxicBurden hypoxic_burden(std::span<const double> signal, double fs, std::span<const DesaturationEvent> events,
                             double level) {
  HypoxicBurden h;
  if (signal.empty()) return h;
  const double total_s = static_cast<double>(signal.size()) / fs;
  double dur = 0, amax = 0, a100 = 0;
  for (const auto& e : events) {
    dur += e.duration_s;
    amax += e.area_max;
    a100 += e.area_100;
  }
  h.pod = dur / total_s;
  h.aod_max = amax / total_s;
  h.aod_100 = a100 / total_s;
  std::size_t below = 0;
  double deficit = 0;
  for (double v : signal) {
    if (v < level) {
      ++below;
      deficit += level - v;
    }
  }
  const auto n = static_cast<double>(signal.size());
  h.ct = 100.0 * static_cast<double>(below) / n;
  h.ca = deficit / n;
  return h;
}

void write_event_dump(std::ostream& out, std::span<const DesaturationEvent> events) {
  using text::format_double;
  out << "start_idx,min_idx,end_idx,baseline,min_value,depth_max,slope,area_max,area_100\n";
  for (const auto& e : events) {
    out << e.start_idx << ',' << e.min_idx << ',' << e.end_idx << ',' << format_double(e.baseline) << ','
        << format_double(e.min_value) << ',' << format_double(e.depth_max) << ',' << format_double(e.slope) << ','
        << format_double(e.area_max) << ',' << format_double(e.area_100) << '\n';
  }
}

} // namespace oxicopd
