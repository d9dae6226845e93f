#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace oxicopd {

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
};

Confusion confusion(std::span<const int> truth, std::span<const int> predicted);

/// Rates with an empty denominator are reported as 0.
struct Rates {
  double se = 0, sp = 0, ppv = 0, npv = 0;
  double f1 = 0, kappa = 0, accuracy = 0;
};

Rates rates(const Confusion& c);

/// Area under the ROC curve as the Mann-Whitney statistic (ties count 1/2).
/// Throws when only one class is present.
double auroc(std::span<const int> truth, std::span<const double> score);

struct RocPoint {
  double fpr = 0, tpr = 0, threshold = 0;
};

/// ROC vertices for thresholds at every distinct score (score >= threshold is
/// positive), descending, starting from (0, 0) at +inf.
std::vector<RocPoint> roc_curve(std::span<const int> truth, std::span<const double> score);

/// Sensitivity among positives of each GOLD grade that occurs.
std::map<int, double> sensitivity_by_grade(std::span<const int> truth, std::span<const int> predicted,
                                           std::span<const std::optional<int>> grade);

} // namespace oxicopd
