#include "oxicopd/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "oxicopd/error.hpp"
#include "oxicopd/text.hpp"

namespace oxicopd {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void require_two_classes(const Dataset& d) {
  const auto ones = std::count(d.y.begin(), d.y.end(), 1);
  if (d.n == 0 || ones == 0 || ones == static_cast<std::ptrdiff_t>(d.n)) {
    throw Error("training data must contain both classes");
  }
}

} // namespace

std::string LrHyper::describe() const {
  return "learning_rate=" + text::format_double(learning_rate) + " l2=" + text::format_double(l2) +
         " max_epochs=" + std::to_string(max_epochs);
}

double LrModel::probability(std::span<const double> row) const {
  if (row.size() != weights.size()) throw Error("row width does not match the model");
  double z = bias;
  for (std::size_t j = 0; j < row.size(); ++j) z += weights[j] * row[j];
  return sigmoid(z);
}

LrObjective lr_objective(const Dataset& d, std::span<const double> w, double b, double l2) {
  LrObjective o;
  o.grad_w.assign(d.p, 0.0);
  for (std::size_t i = 0; i < d.n; ++i) {
    const auto row = d.row(i);
    double z = b;
    for (std::size_t j = 0; j < d.p; ++j) z += w[j] * row[j];
    o.loss += d.y[i] == 1 ? softplus(-z) : softplus(z);
    const double r = sigmoid(z) - d.y[i];
    for (std::size_t j = 0; j < d.p; ++j) o.grad_w[j] += r * row[j];
    o.grad_b += r;
  }
  const auto n = static_cast<double>(d.n);
  o.loss /= n;
  o.grad_b /= n;
  double norm = 0;
  for (std::size_t j = 0; j < d.p; ++j) {
    o.grad_w[j] = o.grad_w[j] / n + l2 * w[j];
    norm += w[j] * w[j];
  }
  o.loss += 0.5 * l2 * norm;
  return o;
}

LrModel train_lr(const Dataset& d, const LrHyper& h) {
  require_two_classes(d);
  if (!(h.learning_rate > 0)) throw Error("learning rate must be positive (" + h.describe() + ")");
  if (h.l2 < 0) throw Error("l2 must be non-negative (" + h.describe() + ")");
  LrModel m;
  m.weights.assign(d.p, 0.0);
  double previous = 0;
  for (std::size_t epoch = 0; epoch <= h.max_epochs; ++epoch) {
    const auto o = lr_objective(d, m.weights, m.bias, h.l2);
    if (!std::isfinite(o.loss)) throw Error("logistic loss diverged (" + h.describe() + ")");
    m.loss_history.push_back(o.loss);
    if (epoch == h.max_epochs) break;
    if (epoch > 0 && std::abs(previous - o.loss) <= h.tolerance * std::max(1.0, std::abs(o.loss))) break;
    previous = o.loss;
    for (std::size_t j = 0; j < d.p; ++j) m.weights[j] -= h.learning_rate * o.grad_w[j];
    m.bias -= h.learning_rate * o.grad_b;
  }
  return m;
}

} // namespace oxicopd
