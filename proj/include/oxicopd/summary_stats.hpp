#pragma once

#include <span>
#include <utility>
#include <vector>

namespace oxicopd::stats {

double mean(std::span<const double> v);
/// Population (divide-by-N) standard deviation; 0 for fewer than two values.
double pop_sd(std::span<const double> v);
std::pair<double, double> mean_sd(std::span<const double> v);
double median(std::span<const double> v);
/// Linear-interpolation percentile (rank q/100 * (n-1)), q in [0, 100].
double percentile(std::span<const double> v, double q);
/// Sample standard deviation (divide by N-1); 0 for fewer than two values.
double sample_sd(std::span<const double> v);

} // namespace oxicopd::stats
