#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "oxicopd/features.hpp"

namespace oxicopd {

/// Dense row-major design matrix with binary labels.
struct Dataset {
  std::size_t n = 0, p = 0;
  std::vector<double> x;
  std::vector<int> y;

  double at(std::size_t i, std::size_t j) const { return x[i * p + j]; }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * p, p}; }
  void push_back(std::span<const double> values, int label);
};

Dataset to_dataset(const FeatureMatrix& matrix);

/// Per-column z-score fitted on training rows. Zero-variance columns keep sd 1.
struct Standardizer {
  std::vector<double> mean, sd;

  static Standardizer fit(const Dataset& data);
  void apply(Dataset& data) const;
  std::vector<double> apply(std::span<const double> row) const;
};

} // namespace oxicopd
