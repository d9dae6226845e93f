#include "oxicopd/preprocess.hpp"

#include <algorithm>

#include "oxicopd/error.hpp"

namespace oxicopd {

std::vector<double> range_filter(std::span<const double> samples, double min_valid, double max_valid) {
  std::vector<double> out;
  out.reserve(samples.size());
  std::copy_if(samples.begin(), samples.end(), std::back_inserter(out),
               [&](double s) { return s >= min_valid && s <= max_valid; });
  if (out.empty()) throw Error("empty after preprocessing");
  return out;
}

std::vector<double> median_smooth(std::span<const double> samples, std::size_t k) {
  if (k < 1 || k % 2 == 0) throw Error("median filter length must be odd and >= 1");
  const std::size_t n = samples.size();
  std::vector<double> out(n);
  std::vector<double> buf;
  buf.reserve(k);
  const std::size_t half_max = k / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t half = std::min({half_max, i, n - 1 - i});
    buf.assign(samples.begin() + static_cast<std::ptrdiff_t>(i - half),
               samples.begin() + static_cast<std::ptrdiff_t>(i + half + 1));
    auto mid = buf.begin() + static_cast<std::ptrdiff_t>(half);
    std::nth_element(buf.begin(), mid, buf.end());
    out[i] = *mid;
  }
  return out;
}

OximetryRecording preprocess(const OximetryRecording& recording, const PreprocessParams& params) {
  OximetryRecording out = recording;
  try {
    out.samples = median_smooth(range_filter(recording.samples, params.min_valid, params.max_valid),
                                params.median_length);
  } catch (const Error& e) {
    throw Error("patient " + recording.patient_id + ": " + e.what());
  }
  return out;
}

} // namespace oxicopd
