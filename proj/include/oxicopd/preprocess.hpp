#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oxicopd/recording.hpp"

namespace oxicopd {

struct PreprocessParams {
  double min_valid = 50.0;
  double max_valid = 100.0;
  std::size_t median_length = 9;
};

/// Drops samples outside [min_valid, max_valid] and closes the gaps.
/// Throws Error("empty after preprocessing") when nothing survives.
std::vector<double> range_filter(std::span<const double> samples, double min_valid = 50.0,
                                 double max_valid = 100.0);

/// Centered running median of odd length k. Near the edges the window shrinks
/// symmetrically, so output length equals input length.
std::vector<double> median_smooth(std::span<const double> samples, std::size_t k = 9);

OximetryRecording preprocess(const OximetryRecording& recording, const PreprocessParams& params = {});

} // namespace oxicopd
