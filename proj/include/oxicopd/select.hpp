#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oxicopd/features.hpp"

namespace oxicopd {

/// Mid-ranks (1-based, ties averaged).
std::vector<double> midranks(std::span<const double> values);

/// Two-sided Wilcoxon rank-sum p-value: normal approximation with tie and
/// continuity corrections. Never returns exactly 0.
double rank_sum_test(std::span<const double> a, std::span<const double> b);

/// Integer codes for MI estimation. With at most `bins` distinct values the
/// values themselves are the categories; otherwise equal-frequency bins with
/// tied values kept in one bin.
std::vector<int> discretize(std::span<const double> x, std::size_t bins = 10);

/// Plug-in mutual information (nats) of two coded variables.
double mutual_information_codes(std::span<const int> a, std::span<const int> b);
double mutual_information(std::span<const double> x, std::span<const double> y, std::size_t bins = 10);

struct MrmrResult {
  std::vector<std::string> selected;
  std::vector<std::size_t> indices;
  std::vector<double> phi;        // incremental score of each pick
  std::vector<double> relevance;  // I(x, c) of each pick
  std::vector<double> redundancy; // mean I(x, s) over the features already chosen
};

/// Greedy mRMR (relevance minus mean redundancy); ties go to the earlier column.
MrmrResult mrmr_select(const FeatureMatrix& matrix, std::size_t k, std::size_t bins = 10, std::size_t jobs = 1);

struct ScreeningEntry {
  std::string feature;
  double p_value = 1;
  std::size_t rank = 0; // 1 = smallest p
  double median_copd = 0, iqr_copd = 0;
  double median_non_copd = 0, iqr_non_copd = 0;
};

struct ScreeningReport {
  std::string unit = "window"; // what one observation is
  std::vector<ScreeningEntry> entries; // ascending p, ties in column order
};

/// COPD vs non-COPD rank-sum test of every column, one observation per row.
ScreeningReport screen_features(const FeatureMatrix& matrix);

/// `feature,p_value,rank,median_copd,iqr_copd,median_non_copd,iqr_non_copd,unit`
void write_screening(std::ostream& out, const ScreeningReport& report);
/// `step,feature,phi,relevance`
void write_mrmr(std::ostream& out, const MrmrResult& result);

} // namespace oxicopd
