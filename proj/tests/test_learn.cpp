#include <fstream>
#include <numeric>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "oxicopd/error.hpp"
#include "oxicopd/forest.hpp"
#include "oxicopd/logistic.hpp"
#include "oxicopd/metrics.hpp"
#include "oxicopd/model_store.hpp"
#include "oxicopd/nested_cv.hpp"
#include "oxicopd/rng.hpp"

using namespace oxicopd;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

Dataset blobs(std::size_t n, double margin, std::uint64_t seed, std::size_t noise_columns = 0) {
  Rng rng(seed);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    std::vector<double> row{rng.normal(y ? margin : -margin, 0.5), rng.normal(0, 1)};
    for (std::size_t k = 0; k < noise_columns; ++k) row.push_back(rng.normal(0, 1));
    d.push_back(row, y);
  }
  return d;
}

Dataset xor_set(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const int a = static_cast<int>(rng.below(2)), b = static_cast<int>(rng.below(2));
    d.push_back(std::vector<double>{rng.normal(a ? 2 : -2, 0.5), rng.normal(b ? 2 : -2, 0.5)}, a ^ b);
  }
  return d;
}

// Plain recursive CART with the same split conventions, for unit weights.
struct NaiveNode {
  int feature = -1;
  double threshold = 0, value = 0;
  std::unique_ptr<NaiveNode> left, right;
};

std::unique_ptr<NaiveNode> naive_cart(const Dataset& d, std::vector<std::size_t> idx, std::size_t depth,
                                      const RfHyper& h) {
  auto node = std::make_unique<NaiveNode>();
  double ones = 0;
  for (auto i : idx) ones += d.y[i];
  const auto n = static_cast<double>(idx.size());
  node->value = ones / n;
  if (depth >= h.max_depth || n < static_cast<double>(h.min_samples_split) || ones == 0 || ones == n) return node;
  const auto g = [](double w, double w1) { return w > 0 ? 2 * (w1 / w) * (1 - w1 / w) : 0.0; };
  bool found = false;
  double best = 0, thr = 0;
  std::size_t feat = 0;
  for (std::size_t j = 0; j < d.p; ++j) {
    auto sorted = idx;
    std::stable_sort(sorted.begin(), sorted.end(), [&](auto a, auto b) { return d.at(a, j) < d.at(b, j); });
    double wl = 0, wl1 = 0;
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
      wl += 1;
      wl1 += d.y[sorted[k]];
      const double x = d.at(sorted[k], j), next = d.at(sorted[k + 1], j);
      if (x == next || wl < static_cast<double>(h.min_samples_leaf) ||
          n - wl < static_cast<double>(h.min_samples_leaf)) {
        continue;
      }
      const double dec = n * g(n, ones) - wl * g(wl, wl1) - (n - wl) * g(n - wl, ones - wl1);
      if (!found || dec > best) {
        found = true;
        best = dec;
        feat = j;
        thr = x + (next - x) / 2;
      }
    }
  }
  if (!found) return node;
  node->feature = static_cast<int>(feat);
  node->threshold = thr;
  std::vector<std::size_t> l, r;
  for (auto i : idx) (d.at(i, feat) <= thr ? l : r).push_back(i);
  node->left = naive_cart(d, l, depth + 1, h);
  node->right = naive_cart(d, r, depth + 1, h);
  return node;
}

double naive_predict(const NaiveNode& n, std::span<const double> row) {
  if (n.feature < 0) return n.value;
  return naive_predict(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? *n.left : *n.right, row);
}

std::size_t naive_size(const NaiveNode& n) { return n.feature < 0 ? 1 : 1 + naive_size(*n.left) + naive_size(*n.right); }

double accuracy(const Dataset& d, const std::function<double(std::span<const double>)>& proba) {
  double ok = 0;
  for (std::size_t i = 0; i < d.n; ++i) ok += ((proba(d.row(i)) >= 0.5 ? 1 : 0) == d.y[i]) ? 1 : 0;
  return ok / static_cast<double>(d.n);
}

// Cohort of cached biomarkers with a planted class difference in a few columns.
std::vector<RecordingBiomarkers> fake_cohort(std::size_t n_copd, std::size_t n_other, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RecordingBiomarkers> out;
  const WindowParams wp;
  for (std::size_t i = 0; i < n_copd + n_other; ++i) {
    RecordingBiomarkers c;
    auto& rec = c.recording;
    const bool copd = i < n_copd;
    rec.patient_id = (copd ? "C" : "N") + std::to_string(i);
    rec.fs = 1.0 / 60;
    rec.samples.assign(60 * 6 + static_cast<std::size_t>(rng.below(90)), 95.0);
    rec.label = {copd, copd ? std::optional<int>(1 + static_cast<int>(i % 4)) : std::nullopt};
    rec.demographics = {i % 3 ? Gender::male : Gender::female, rng.uniform(40, 80), rng.uniform(60, 100),
                        rng.uniform(155, 190), Smoking::ex_smoker};
    const double patient_effect = rng.normal(0, 0.3);
    const auto fill = [&](BiomarkerVector& b) {
      for (std::size_t k = 0; k < kBiomarkerCount; ++k) b.values[k] = rng.normal(0, 1);
      b.values[0] += copd ? 3.0 + patient_effect : patient_effect;
      b.values[40] -= copd ? 1.0 : 0.0;
    };
    fill(c.overall);
    for (bool training : {false, true}) {
      for (auto s : window_starts(rec.samples.size(), rec.fs, wp.length_s, window_hop_s(rec, training, wp))) {
        if (!c.windows.count(s)) fill(c.windows[s]);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

} // namespace

TEST_CASE("counter-based generator") {
  Rng a(42), b(42), c(43);
  std::vector<std::uint64_t> va, vb, vc;
  for (int i = 0; i < 100; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(Rng(1).split(3)() == Rng(1).split(3)());
  CHECK(Rng(1).split(3)() != Rng(1).split(4)());
  Rng r(7);
  double mean = 0, sq = 0;
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 100000; ++i) {
    const double z = r.normal();
    mean += z;
    sq += z * z;
    ++hist[static_cast<std::size_t>(r.below(7))];
  }
  CHECK(std::abs(mean / 1e5) < 0.02);
  CHECK(std::abs(sq / 1e5 - 1) < 0.02);
  for (int h : hist) CHECK(std::abs(h - 100000 / 7) < 600);
}

TEST_CASE("metric kernel") {
  SUBCASE("confusion counts of the reference table") {
    const Confusion c{469, 72, 1046, 42};
    const auto r = rates(c);
    CHECK(r.ppv == 469.0 / 541.0);
    CHECK(r.se == 469.0 / 511.0);
    CHECK(r.ppv == Approx(0.8669).epsilon(0).scale(1).epsilon(1e-4));
    CHECK(std::abs(r.ppv - 0.8669) <= 1e-4);
    CHECK(std::abs(r.se - 0.9178) <= 1e-4);
    CHECK(r.sp == 1046.0 / 1118.0);
    CHECK(r.npv == 1046.0 / 1088.0);
    CHECK(r.f1 == Approx(2 * r.ppv * r.se / (r.ppv + r.se)));
    CHECK(c.total() == 1629);
  }
  SUBCASE("AUROC examples") {
    CHECK(auroc(std::vector<int>{1, 0, 1}, std::vector<double>{0.9, 0.8, 0.3}) == 0.5);
    const std::vector<int> y{0, 0, 1, 1};
    const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
    CHECK(auroc(y, s) == 1);
    const auto r = rates(confusion(y, std::vector<int>{0, 0, 1, 1}));
    CHECK(r.f1 == 1);
    CHECK(r.kappa == 1);
    CHECK_THROWS_AS(auroc(std::vector<int>{1, 1}, std::vector<double>{0.2, 0.3}), Error);
  }
  SUBCASE("majority-class predictions have zero kappa") {
    const std::vector<int> y{0, 1, 0, 1, 0, 1};
    CHECK(rates(confusion(y, std::vector<int>(6, 0))).kappa == 0);
    CHECK(rates(confusion(y, std::vector<int>(6, 1))).kappa == 0);
  }
  SUBCASE("AUROC agrees with pair counting and is rank invariant") {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
      std::vector<int> y;
      std::vector<double> s, warped;
      for (int i = 0; i < 40; ++i) {
        y.push_back(i % 3 == 0 ? 1 : 0);
        s.push_back(std::round(rng.uniform() * 10) / 10 + 0.05 * y.back());
        warped.push_back(std::exp(3 * s.back()));
      }
      CHECK(auroc(y, s) == Approx(oracle::auroc_pairs(y, s)));
      CHECK(auroc(y, warped) == auroc(y, s));
      const auto roc = roc_curve(y, s);
      CHECK(roc.front().fpr == 0);
      CHECK(roc.back().fpr == 1);
      CHECK(roc.back().tpr == 1);
      double area = 0;
      for (std::size_t k = 1; k < roc.size(); ++k) {
        area += (roc[k].fpr - roc[k - 1].fpr) * (roc[k].tpr + roc[k - 1].tpr) / 2;
      }
      CHECK(area == Approx(auroc(y, s)));
    }
  }
  SUBCASE("sensitivity by grade") {
    const std::vector<int> y{1, 1, 1, 0};
    const std::vector<int> p{1, 0, 1, 1};
    const std::vector<std::optional<int>> g{1, 1, 3, std::nullopt};
    const auto se = sensitivity_by_grade(y, p, g);
    CHECK(se.at(1) == 0.5);
    CHECK(se.at(3) == 1);
    CHECK_FALSE(se.count(2));
  }
}

TEST_CASE("logistic regression") {
  SUBCASE("separable blobs are fit exactly") {
    auto d = blobs(200, 2, 1);
    Standardizer::fit(d).apply(d);
    LrHyper h;
    h.learning_rate = 0.5;
    const auto m = train_lr(d, h);
    CHECK(accuracy(d, [&](auto row) { return m.probability(row); }) == 1.0);
  }
  SUBCASE("one class is rejected") {
    Dataset d;
    d.push_back(std::vector<double>{1.0}, 1);
    d.push_back(std::vector<double>{2.0}, 1);
    CHECK_THROWS_AS(train_lr(d, {}), Error);
  }
  SUBCASE("gradient matches central differences") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto d = blobs(30, 0.5, seed, 3);
      Rng rng(seed + 50);
      std::vector<double> w(d.p);
      for (auto& v : w) v = rng.normal(0, 0.7);
      const double b = rng.normal(0, 0.3), l2 = 0.05 * static_cast<double>(seed % 3);
      const auto o = lr_objective(d, w, b, l2);
      const double eps = 1e-6;
      for (std::size_t j = 0; j < d.p; ++j) {
        auto wp = w, wm = w;
        wp[j] += eps;
        wm[j] -= eps;
        const double fd = (lr_objective(d, wp, b, l2).loss - lr_objective(d, wm, b, l2).loss) / (2 * eps);
        CHECK(o.grad_w[j] == Approx(fd).epsilon(1e-6));
      }
      const double fd = (lr_objective(d, w, b + eps, l2).loss - lr_objective(d, w, b - eps, l2).loss) / (2 * eps);
      CHECK(o.grad_b == Approx(fd).epsilon(1e-6));
    }
  }
  SUBCASE("loss never increases at a small learning rate") {
    auto d = blobs(300, 0.3, 9, 4);
    Standardizer::fit(d).apply(d);
    LrHyper h;
    h.learning_rate = 1e-6;
    h.max_epochs = 200;
    h.tolerance = 0;
    const auto m = train_lr(d, h);
    CHECK(m.loss_history.size() == 201);
    for (std::size_t e = 1; e < m.loss_history.size(); ++e) CHECK(m.loss_history[e] <= m.loss_history[e - 1]);
  }
  SUBCASE("divergence names the hyperparameters") {
    auto d = blobs(50, 0.1, 2);
    LrHyper h;
    h.learning_rate = 1e300;
    h.max_epochs = 50;
    CHECK_THROWS_WITH_AS(train_lr(d, h), doctest::Contains("learning_rate=1e+300"), Error);
  }
}

TEST_CASE("standardization uses training statistics only") {
  auto train = blobs(100, 1, 4);
  auto test = blobs(60, 1, 5);
  for (auto& v : test.x) v += 0.7;
  const auto z = Standardizer::fit(train);
  z.apply(train);
  z.apply(test);
  double train_mean = 0, test_mean = 0;
  for (std::size_t i = 0; i < train.n; ++i) train_mean += train.at(i, 1);
  for (std::size_t i = 0; i < test.n; ++i) test_mean += test.at(i, 1);
  CHECK(std::abs(train_mean / static_cast<double>(train.n)) < 1e-12);
  CHECK(std::abs(test_mean / static_cast<double>(test.n)) > 0.1);
}

TEST_CASE("random forest") {
  SUBCASE("XOR needs the forest") {
    auto train = xor_set(400, 1);
    auto test = xor_set(400, 2);
    RfHyper h;
    h.n_estimators = 50;
    const auto f = train_rf(train, h, Rng(3));
    CHECK(accuracy(test, [&](auto row) { return f.probability(row); }) >= 0.95);
    LrHyper lh;
    lh.learning_rate = 0.1;
    const auto z = Standardizer::fit(train);
    z.apply(train);
    z.apply(test);
    const auto lr = train_lr(train, lh);
    CHECK(accuracy(test, [&](auto row) { return lr.probability(row); }) <= 0.6);
  }
  SUBCASE("depth-one stump on a perfect binary feature") {
    Dataset d;
    Rng rng(5);
    for (int i = 0; i < 10; ++i) d.push_back(std::vector<double>{rng.normal(), static_cast<double>(i % 2)}, i % 2);
    RfHyper h;
    h.max_depth = 1;
    h.max_features = MaxFeatures::all;
    h.bootstrap = false;
    std::vector<double> w(d.n, 1.0), imp;
    const auto t = build_tree(d, w, h, Rng(1), imp);
    REQUIRE(t.value.size() == 3);
    CHECK(t.feature[0] == 1);
    CHECK(t.threshold[0] == 0.5);
    // root Gini 0.5 over 10 samples, pure children
    CHECK(imp[1] == Approx(10 * 0.5));
    CHECK(imp[0] == 0);
    h.n_estimators = 1;
    const auto f = train_rf(d, h, Rng(1));
    CHECK(f.importance[1] == 1.0);
    CHECK(feature_importance(f).front().first == 1);
  }
  SUBCASE("one tree without bootstrap is a plain decision tree") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Dataset d = blobs(150, 0.4, seed, 2);
      for (std::size_t i = 0; i < d.n; ++i) d.x[i * d.p + 3] = std::round(d.x[i * d.p + 3]); // ties
      RfHyper h;
      h.n_estimators = 1;
      h.bootstrap = false;
      h.max_features = MaxFeatures::all;
      h.max_depth = 3 + seed % 5;
      h.min_samples_leaf = 1 + seed % 3;
      h.min_samples_split = 2 + seed % 4;
      const auto f = train_rf(d, h, Rng(seed));
      std::vector<std::size_t> idx(d.n);
      std::iota(idx.begin(), idx.end(), 0);
      const auto naive = naive_cart(d, idx, 0, h);
      REQUIRE(f.trees.size() == 1);
      CHECK(f.trees[0].value.size() == naive_size(*naive));
      Rng probe(seed + 99);
      for (int k = 0; k < 300; ++k) {
        std::vector<double> row(d.p);
        for (auto& v : row) v = probe.normal(0, 1.5);
        CHECK(f.trees[0].leaf_value(row) == naive_predict(*naive, row));
      }
      for (std::size_t i = 0; i < d.n; ++i) CHECK(f.trees[0].leaf_value(d.row(i)) == naive_predict(*naive, d.row(i)));
    }
  }
  SUBCASE("importance ranks signal above noise and sums to one") {
    const auto d = blobs(300, 0.8, 12, 3);
    RfHyper h;
    h.n_estimators = 60;
    const auto f = train_rf(d, h, Rng(8));
    double sum = 0;
    for (double v : f.importance) sum += v;
    CHECK(sum == Approx(1.0).epsilon(1e-9));
    for (std::size_t j = 1; j < d.p; ++j) CHECK(f.importance[0] > f.importance[j]);
    const auto ranked = feature_importance(f);
    CHECK(ranked.front().first == 0);
    CHECK_THROWS_AS(feature_importance(Forest{}), Error);
  }
  SUBCASE("seeded and independent of the worker count") {
    const auto d = blobs(200, 0.5, 13, 4);
    RfHyper h;
    h.n_estimators = 40;
    const auto a = train_rf(d, h, Rng(77), 1);
    const auto b = train_rf(d, h, Rng(77), 4);
    const auto c = train_rf(d, h, Rng(78), 1);
    bool differs = false;
    Rng probe(1);
    for (int k = 0; k < 200; ++k) {
      std::vector<double> row(d.p);
      for (auto& v : row) v = probe.normal();
      CHECK(a.probability(row) == b.probability(row));
      differs = differs || a.probability(row) != c.probability(row);
    }
    CHECK(differs);
    CHECK(a.importance == b.importance);
  }
  SUBCASE("depth cap") {
    const auto d = blobs(300, 0.1, 14, 3);
    RfHyper h;
    h.n_estimators = 10;
    h.max_depth = 4;
    for (const auto& t : train_rf(d, h, Rng(1)).trees) CHECK(t.depth() <= 4);
  }
}

TEST_CASE("model store") {
  const auto dir = fs::temp_directory_path() / "oxicopd_test_models";
  fs::create_directories(dir);
  auto d = blobs(120, 1, 21, 2);
  FeatureMatrix table;
  table.columns = {"a", "b", "c", "d"};
  for (std::size_t i = 0; i < d.n; ++i) table.rows.push_back({"p" + std::to_string(i), 0, d.y[i], {d.row(i).begin(), d.row(i).end()}});

  for (auto kind : {ClassifierKind::lr, ClassifierKind::rf}) {
    TrainedModel m;
    m.model_kind = ModelKind::model2;
    m.classifier = kind;
    m.features = table.columns;
    m.standardizer = Standardizer::fit(d);
    Dataset z = d;
    m.standardizer.apply(z);
    if (kind == ClassifierKind::lr) {
      m.lr = train_lr(z, m.lr_hyper);
    } else {
      m.rf_hyper.n_estimators = 20;
      m.rf = train_rf(z, m.rf_hyper, Rng(2));
    }
    const auto path = dir / ("m_" + to_string(kind) + ".json");
    save_model(path, m);
    const auto back = load_model(path);
    CHECK(back.score(table) == m.score(table));
    CHECK(back.features == m.features);

    auto renamed = table;
    renamed.columns[2] = "zzz";
    CHECK_THROWS_AS(back.score(renamed), ValidationError);
    auto narrow = table.select(std::vector<std::string>{"a", "b"});
    CHECK_THROWS_AS(back.score(narrow), ValidationError);
  }
  std::ofstream(dir / "bad.json") << R"({"format":"oxicopd-model","version":99})";
  CHECK_THROWS_AS(load_model(dir / "bad.json"), ValidationError);
  std::ofstream(dir / "garbage.json") << "not json";
  CHECK_THROWS_AS(load_model(dir / "garbage.json"), ValidationError);
}

TEST_CASE("nested cross-validation on a planted cohort") {
  const auto cohort = fake_cohort(12, 18, 5);
  NestedCvParams p;
  p.n_outer = 3;
  p.search_budget = 4;
  p.seed = 11;
  p.n_select = 10;
  for (auto classifier : {ClassifierKind::rf, ClassifierKind::lr}) {
    const auto rep = nested_cv(cohort, ModelKind::model3, classifier, p);
    REQUIRE(rep.folds.size() == 3);
    CHECK(hygiene_violations(rep).empty());
    for (const auto& f : rep.folds) {
      CHECK(f.test_patients.size() == 6); // round(0.2 * 12) + round(0.2 * 18)
      CHECK(f.train_patients.size() == 24);
      CHECK(f.features.size() == 10);
      CHECK(f.candidates.size() == 4);
      CHECK(f.inner.size() == 5);
      std::set<std::string> val;
      for (const auto& s : f.inner) {
        CHECK(s.train.size() + s.validation.size() == f.train_patients.size());
        val.insert(s.validation.begin(), s.validation.end());
      }
      CHECK(val.size() == f.train_patients.size());
      CHECK(f.patient_metrics.confusion.total() == 6);
      CHECK(f.window_metrics.confusion.total() == f.windows.size());
      // planted shift is strong
      CHECK(f.patient_metrics.auroc >= 0.8);
      // augmentation only in training
      bool augmented = false;
      for (const auto& w : f.train_windows) augmented = augmented || std::fmod(w.start_s, 7200) != 0;
      CHECK(augmented);
      for (const auto& w : f.windows) CHECK(std::fmod(w.start_s, 7200) == 0);
    }
    std::ostringstream s1, s2;
    write_summary(s1, rep);
    p.jobs = 3;
    write_summary(s2, nested_cv(cohort, ModelKind::model3, classifier, p));
    p.jobs = 1;
    CHECK(s1.str() == s2.str());
    CHECK(s1.str().rfind("model,classifier,metric,median,sd,mean,iqr\nmodel3,", 0) == 0);
  }

  SUBCASE("leakage is detected") {
    auto rep = nested_cv(cohort, ModelKind::model1, ClassifierKind::lr, p);
    CHECK_FALSE(rep.folds[0].selection.has_value());
    CHECK(rep.folds[0].features.size() == 5);
    rep.folds[1].inner[2].validation.push_back(rep.folds[1].inner[2].train.front());
    rep.folds[0].test_patients.push_back(rep.folds[0].train_patients.front());
    CHECK(hygiene_violations(rep).size() >= 2);
  }
  SUBCASE("too few patients per class") {
    CHECK_THROWS_WITH_AS(nested_cv(fake_cohort(4, 10, 1), ModelKind::model2, ClassifierKind::lr, p),
                         doctest::Contains("stratification"), Error);
  }
}

TEST_CASE("grids") {
  CHECK(lr_grid().size() == 35);
  const auto g = rf_grid();
  CHECK(g.size() == 7 * 2 * 11 * 3 * 3 * 2);
  CHECK(default_selection_size(ModelKind::model2) == 38);
  CHECK(default_selection_size(ModelKind::model3) == 35);
  CHECK(default_selection_size(ModelKind::model4) == 35);
  CHECK(default_selection_size(ModelKind::model1) == 0);
}
