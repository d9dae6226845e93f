#include "oxicopd/dataset.hpp"

#include <cmath>

#include "oxicopd/error.hpp"

namespace oxicopd {

void Dataset::push_back(std::span<const double> values, int label) {
  if (n == 0 && p == 0) p = values.size();
  if (values.size() != p) throw Error("row width does not match the dataset");
  x.insert(x.end(), values.begin(), values.end());
  y.push_back(label);
  ++n;
}

Dataset to_dataset(const FeatureMatrix& m) {
  Dataset d;
  d.p = m.columns.size();
  d.x.reserve(m.rows.size() * d.p);
  for (const auto& r : m.rows) d.push_back(r.values, r.label);
  return d;
}

Standardizer Standardizer::fit(const Dataset& d) {
  Standardizer s;
  s.mean.assign(d.p, 0.0);
  s.sd.assign(d.p, 1.0);
  if (d.n == 0) return s;
  for (std::size_t j = 0; j < d.p; ++j) {
    double mu = 0;
    for (std::size_t i = 0; i < d.n; ++i) mu += d.at(i, j);
    mu /= static_cast<double>(d.n);
    double var = 0;
    for (std::size_t i = 0; i < d.n; ++i) var += (d.at(i, j) - mu) * (d.at(i, j) - mu);
    const double sd = std::sqrt(var / static_cast<double>(d.n));
    s.mean[j] = mu;
    s.sd[j] = sd > 0 ? sd : 1.0;
  }
  return s;
}

void Standardizer::apply(Dataset& d) const {
  if (d.p != mean.size()) throw Error("standardizer width does not match the dataset");
  for (std::size_t i = 0; i < d.n; ++i) {
    for (std::size_t j = 0; j < d.p; ++j) d.x[i * d.p + j] = (d.x[i * d.p + j] - mean[j]) / sd[j];
  }
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != mean.size()) throw Error("standardizer width does not match the row");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / sd[j];
  return out;
}

} // namespace oxicopd
