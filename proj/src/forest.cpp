#include "oxicopd/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oxicopd/error.hpp"
#include "oxicopd/parallel.hpp"

namespace oxicopd {

namespace {

double gini(double w, double w1) {
  if (w <= 0) return 0;
  const double q = w1 / w;
  return 2 * q * (1 - q);
}

struct Split {
  bool found = false;
  std::size_t feature = 0;
  std::size_t left_count = 0; // samples in [lo, lo + left_count) of that feature's order
  double threshold = 0;
  double decrease = 0; // weighted impurity decrease
};

class TreeBuilder {
public:
  TreeBuilder(const Dataset& d, std::span<const double> w, const RfHyper& h, Rng rng, std::vector<double>& importance)
      : d_(d), w_(w), h_(h), rng_(rng), importance_(importance) {
    for (std::size_t i = 0; i < d.n; ++i) {
      if (w[i] > 0) active_.push_back(i);
    }
    m_ = active_.size();
    order_.resize(d.p * m_);
    for (std::size_t j = 0; j < d.p; ++j) {
      auto* o = order_.data() + j * m_;
      std::copy(active_.begin(), active_.end(), o);
      std::stable_sort(o, o + m_, [&](std::size_t a, std::size_t b) { return d.at(a, j) < d.at(b, j); });
    }
    goes_left_.assign(d.n, 0);
    buffer_.resize(m_);
    features_.resize(d.p);
    std::iota(features_.begin(), features_.end(), 0);
    mtry_ = h.max_features == MaxFeatures::all
                ? d.p
                : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d.p))));
  }

  Tree build() {
    if (m_ == 0) throw Error("tree needs at least one weighted sample");
    grow(0, m_, 0);
    return std::move(tree_);
  }

private:
  int add_node(double value) {
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.value.push_back(value);
    return static_cast<int>(tree_.value.size() - 1);
  }

  int grow(std::size_t lo, std::size_t hi, std::size_t depth) {
    const auto* any = order_.data(); // feature 0's order holds the node's samples too
    double w = 0, w1 = 0;
    for (std::size_t k = lo; k < hi; ++k) {
      const auto i = any[k];
      w += w_[i];
      w1 += w_[i] * d_.y[i];
    }
    const int node = add_node(w1 / w);
    if (depth >= h_.max_depth || w < static_cast<double>(h_.min_samples_split) || w1 == 0 || w1 == w) return node;

    const Split s = best_split(lo, hi, w, w1);
    if (!s.found) return node;

    const std::size_t mid = lo + s.left_count;
    const auto* chosen = order_.data() + s.feature * m_;
    for (std::size_t k = lo; k < hi; ++k) goes_left_[chosen[k]] = k < mid ? 1 : 0;
    for (std::size_t j = 0; j < d_.p; ++j) {
      if (j == s.feature) continue;
      auto* o = order_.data() + j * m_;
      std::size_t l = lo, r = 0;
      for (std::size_t k = lo; k < hi; ++k) {
        if (goes_left_[o[k]]) {
          o[l++] = o[k];
        } else {
          buffer_[r++] = o[k];
        }
      }
      std::copy(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(r), o + l);
    }

    importance_[s.feature] += s.decrease;
    tree_.feature[static_cast<std::size_t>(node)] = static_cast<int>(s.feature);
    tree_.threshold[static_cast<std::size_t>(node)] = s.threshold;
    const int left = grow(lo, mid, depth + 1);
    const int right = grow(mid, hi, depth + 1);
    tree_.left[static_cast<std::size_t>(node)] = left;
    tree_.right[static_cast<std::size_t>(node)] = right;
    return node;
  }

  Split best_split(std::size_t lo, std::size_t hi, double w, double w1) {
    Split best;
    const double parent = w * gini(w, w1);
    const auto min_leaf = static_cast<double>(h_.min_samples_leaf);
    const bool sample = mtry_ < d_.p;
    // With subsampling, features are visited in random order until mtry have
    // been inspected and at least one valid split exists.
    std::size_t inspected = 0;
    for (std::size_t f = 0; f < d_.p; ++f) {
      if (sample) {
        if (inspected >= mtry_ && best.found) break;
        const auto pick = f + static_cast<std::size_t>(rng_.below(d_.p - f));
        std::swap(features_[f], features_[pick]);
      }
      const std::size_t j = features_[f];
      ++inspected;
      const auto* o = order_.data() + j * m_;
      if (d_.at(o[lo], j) == d_.at(o[hi - 1], j)) continue;
      double wl = 0, wl1 = 0;
      for (std::size_t k = lo; k + 1 < hi; ++k) {
        const auto i = o[k];
        wl += w_[i];
        wl1 += w_[i] * d_.y[i];
        const double x = d_.at(i, j), next = d_.at(o[k + 1], j);
        if (x == next) continue;
        const double wr = w - wl;
        if (wl < min_leaf || wr < min_leaf) continue;
        const double decrease = parent - wl * gini(wl, wl1) - wr * gini(wr, w1 - wl1);
        if (!best.found || decrease > best.decrease) {
          double thr = x + (next - x) / 2;
          if (!(thr < next)) thr = x;
          best = {true, j, k + 1 - lo, thr, decrease};
        }
      }
    }
    return best;
  }

  const Dataset& d_;
  std::span<const double> w_;
  const RfHyper& h_;
  Rng rng_;
  std::vector<double>& importance_;
  std::vector<std::size_t> active_;
  std::size_t m_ = 0;
  std::vector<std::size_t> order_;
  std::vector<unsigned char> goes_left_;
  std::vector<std::size_t> buffer_;
  std::vector<std::size_t> features_;
  std::size_t mtry_ = 0;
  Tree tree_;
};

} // namespace

std::string RfHyper::describe() const {
  return "n_estimators=" + std::to_string(n_estimators) +
         " max_features=" + (max_features == MaxFeatures::all ? "all" : "sqrt") +
         " max_depth=" + std::to_string(max_depth) + " min_samples_split=" + std::to_string(min_samples_split) +
         " min_samples_leaf=" + std::to_string(min_samples_leaf) + " bootstrap=" + (bootstrap ? "on" : "off");
}

double Tree::leaf_value(std::span<const double> row) const {
  std::size_t node = 0;
  while (feature[node] >= 0) {
    node = static_cast<std::size_t>(row[static_cast<std::size_t>(feature[node])] <= threshold[node] ? left[node]
                                                                                                    : right[node]);
  }
  return value[node];
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> level(value.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t node = 0; node < value.size(); ++node) {
    deepest = std::max(deepest, level[node]);
    if (feature[node] >= 0) {
      level[static_cast<std::size_t>(left[node])] = level[node] + 1;
      level[static_cast<std::size_t>(right[node])] = level[node] + 1;
    }
  }
  return deepest;
}

double Forest::probability(std::span<const double> row) const {
  if (trees.empty()) throw Error("forest is not trained");
  if (row.size() != n_features) throw Error("row width does not match the model");
  std::size_t votes = 0;
  for (const auto& t : trees) votes += t.leaf_value(row) >= 0.5 ? 1 : 0;
  return static_cast<double>(votes) / static_cast<double>(trees.size());
}

Tree build_tree(const Dataset& d, std::span<const double> weights, const RfHyper& h, Rng rng,
                std::vector<double>& importance) {
  importance.assign(d.p, 0.0);
  TreeBuilder b(d, weights, h, rng, importance);
  return b.build();
}

Forest train_rf(const Dataset& d, const RfHyper& h, Rng rng, std::size_t jobs) {
  const auto ones = std::count(d.y.begin(), d.y.end(), 1);
  if (d.n == 0 || ones == 0 || ones == static_cast<std::ptrdiff_t>(d.n)) {
    throw Error("training data must contain both classes");
  }
  if (h.n_estimators == 0) throw Error("forest needs at least one tree");
  Forest f;
  f.n_features = d.p;
  f.trees.resize(h.n_estimators);
  std::vector<std::vector<double>> imp(h.n_estimators);
  parallel_for(h.n_estimators, jobs, [&](std::size_t t) {
    Rng tr = rng.split(t);
    std::vector<double> w(d.n, 1.0);
    if (h.bootstrap) {
      std::fill(w.begin(), w.end(), 0.0);
      for (std::size_t k = 0; k < d.n; ++k) w[static_cast<std::size_t>(tr.below(d.n))] += 1;
    }
    f.trees[t] = build_tree(d, w, h, tr.split(1), imp[t]);
  });
  f.importance.assign(d.p, 0.0);
  for (const auto& ti : imp) {
    const double s = std::accumulate(ti.begin(), ti.end(), 0.0);
    if (!(s > 0)) continue;
    for (std::size_t j = 0; j < d.p; ++j) f.importance[j] += ti[j] / s;
  }
  const double total = std::accumulate(f.importance.begin(), f.importance.end(), 0.0);
  if (total > 0) {
    for (auto& v : f.importance) v /= total;
  }
  return f;
}

std::vector<std::pair<std::size_t, double>> feature_importance(const Forest& f) {
  if (f.trees.empty()) throw Error("forest is not trained");
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t j = 0; j < f.importance.size(); ++j) out.emplace_back(j, f.importance[j]);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

} // namespace oxicopd
