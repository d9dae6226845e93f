#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "oxicopd/dataset.hpp"

namespace oxicopd {

struct LrHyper {
  double learning_rate = 1e-2;
  double l2 = 0.0;
  std::size_t max_epochs = 1000;
  double tolerance = 1e-9; // stop when the loss changes by less (relative)

  std::string describe() const;
};

struct LrModel {
  std::vector<double> weights;
  double bias = 0;
  std::vector<double> loss_history; // loss before each epoch, then the final loss

  double probability(std::span<const double> row) const;
};

/// Mean log-loss plus (l2 / 2) * |w|^2 (bias unregularized) and its gradient.
struct LrObjective {
  double loss = 0;
  std::vector<double> grad_w;
  double grad_b = 0;
};

LrObjective lr_objective(const Dataset& data, std::span<const double> weights, double bias, double l2);

/// Full-batch gradient descent from zero weights. Expects standardized features.
LrModel train_lr(const Dataset& data, const LrHyper& hyper);

} // namespace oxicopd
