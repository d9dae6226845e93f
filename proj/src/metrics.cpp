#include "oxicopd/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "oxicopd/error.hpp"
#include "oxicopd/select.hpp"

namespace oxicopd {

namespace {
double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }
} // namespace

Confusion confusion(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) throw Error("truth and prediction lengths differ");
  Confusion c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1) {
      (pred[i] == 1 ? c.tp : c.fn)++;
    } else {
      (pred[i] == 1 ? c.fp : c.tn)++;
    }
  }
  return c;
}

Rates rates(const Confusion& c) {
  const auto tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const auto tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
  const double n = tp + fp + tn + fn;
  Rates r;
  r.se = ratio(tp, tp + fn);
  r.sp = ratio(tn, tn + fp);
  r.ppv = ratio(tp, tp + fp);
  r.npv = ratio(tn, tn + fn);
  r.f1 = ratio(2 * tp, 2 * tp + fp + fn);
  r.accuracy = ratio(tp + tn, n);
  if (n > 0) {
    const double pe = ((tp + fp) * (tp + fn) + (tn + fn) * (tn + fp)) / (n * n);
    r.kappa = pe < 1 ? (r.accuracy - pe) / (1 - pe) : 0.0;
  }
  return r;
}

double auroc(std::span<const int> truth, std::span<const double> score) {
  if (truth.size() != score.size()) throw Error("truth and score lengths differ");
  const auto ranks = midranks(score);
  double pos = 0, rank_sum = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1) {
      ++pos;
      rank_sum += ranks[i];
    }
  }
  const double neg = static_cast<double>(truth.size()) - pos;
  if (pos == 0 || neg == 0) throw Error("AUROC is undefined with a single class");
  return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

std::vector<RocPoint> roc_curve(std::span<const int> truth, std::span<const double> score) {
  if (truth.size() != score.size()) throw Error("truth and score lengths differ");
  std::vector<std::size_t> order(truth.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  const auto pos = static_cast<double>(std::count(truth.begin(), truth.end(), 1));
  const double neg = static_cast<double>(truth.size()) - pos;
  std::vector<RocPoint> out{{0, 0, std::numeric_limits<double>::infinity()}};
  double tp = 0, fp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (truth[order[k]] == 1 ? tp : fp) += 1;
    if (k + 1 < order.size() && score[order[k + 1]] == score[order[k]]) continue;
    out.push_back({ratio(fp, neg), ratio(tp, pos), score[order[k]]});
  }
  return out;
}

std::map<int, double> sensitivity_by_grade(std::span<const int> truth, std::span<const int> pred,
                                           std::span<const std::optional<int>> grade) {
  if (truth.size() != pred.size() || truth.size() != grade.size()) throw Error("metric input lengths differ");
  std::map<int, std::pair<double, double>> counts;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 1 || !grade[i]) continue;
    auto& c = counts[*grade[i]];
    c.second += 1;
    c.first += pred[i] == 1 ? 1 : 0;
  }
  std::map<int, double> out;
  for (const auto& [g, c] : counts) out[g] = c.first / c.second;
  return out;
}

} // namespace oxicopd
