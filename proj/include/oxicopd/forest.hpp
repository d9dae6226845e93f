#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oxicopd/dataset.hpp"
#include "oxicopd/rng.hpp"

namespace oxicopd {

enum class MaxFeatures { all, sqrt };

struct RfHyper {
  std::size_t n_estimators = 100;
  MaxFeatures max_features = MaxFeatures::sqrt;
  std::size_t max_depth = 10;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  bool bootstrap = true;

  std::string describe() const;
};

/// Flat binary tree; node 0 is the root. Leaves have feature == -1.
struct Tree {
  std::vector<int> feature;
  std::vector<double> threshold; // x <= threshold goes left
  std::vector<int> left, right;
  std::vector<double> value;     // weighted COPD fraction of the node's samples

  double leaf_value(std::span<const double> row) const;
  std::size_t depth() const;
};

struct Forest {
  std::vector<Tree> trees;
  std::size_t n_features = 0;
  std::vector<double> importance; // mean decrease in impurity, sums to 1

  /// Fraction of trees whose leaf majority is COPD.
  double probability(std::span<const double> row) const;
};

/// One CART tree on weighted samples (weights are bootstrap multiplicities;
/// zero-weight samples are ignored). `importance` receives the unnormalized
/// impurity decrease per feature.
Tree build_tree(const Dataset& data, std::span<const double> weights, const RfHyper& hyper, Rng rng,
                std::vector<double>& importance);

/// Tree t draws from rng.split(t), so the result does not depend on `jobs`.
Forest train_rf(const Dataset& data, const RfHyper& hyper, Rng rng, std::size_t jobs = 1);

/// (feature index, importance) in descending importance, ties by index.
std::vector<std::pair<std::size_t, double>> feature_importance(const Forest& forest);

} // namespace oxicopd
