#include "oxicopd/nested_cv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

#include "oxicopd/error.hpp"
#include "oxicopd/parallel.hpp"
#include "oxicopd/rng.hpp"
#include "oxicopd/summary_stats.hpp"
#include "oxicopd/text.hpp"

namespace oxicopd {

std::size_t default_selection_size(ModelKind kind) {
  switch (kind) {
  case ModelKind::model1: return 0;
  case ModelKind::model2: return 38;
  default: return 35;
  }
}

std::vector<LrHyper> lr_grid(const LrHyper& base) {
  std::vector<LrHyper> out;
  for (double lr : {1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
    for (double l2 : {0.0, 1e-4, 1e-3, 1e-2, 1e-1}) {
      LrHyper h = base;
      h.learning_rate = lr;
      h.l2 = l2;
      out.push_back(h);
    }
  }
  return out;
}

std::vector<RfHyper> rf_grid() {
  std::vector<RfHyper> out;
  for (std::size_t n : {100, 110, 120, 150, 200, 250, 300}) {
    for (auto mf : {MaxFeatures::all, MaxFeatures::sqrt}) {
      for (std::size_t depth = 10; depth <= 110; depth += 10) {
        for (std::size_t split : {2, 5, 10}) {
          for (std::size_t leaf : {1, 2, 4}) {
            for (bool boot : {true, false}) out.push_back({n, mf, depth, split, leaf, boot});
          }
        }
      }
    }
  }
  return out;
}

std::string Candidate::describe() const { return classifier == ClassifierKind::lr ? lr.describe() : rf.describe(); }

namespace {

// Stream tags for Rng::split
enum : std::uint64_t { kOuterSplit = 1, kInnerSplit = 2, kSearch = 3, kInnerFit = 4, kRefit = 5 };

struct PatientRows {
  std::vector<FeatureRow> train, eval;
};

struct Fitted {
  LrModel lr;
  Forest rf;
};

Fitted fit(const Candidate& c, const Dataset& d, Rng rng, std::size_t jobs) {
  Fitted f;
  if (c.classifier == ClassifierKind::lr) {
    f.lr = train_lr(d, c.lr);
  } else {
    f.rf = train_rf(d, c.rf, rng, jobs);
  }
  return f;
}

double predict(const Candidate& c, const Fitted& f, std::span<const double> row) {
  return c.classifier == ClassifierKind::lr ? f.lr.probability(row) : f.rf.probability(row);
}

Dataset gather(std::span<const std::size_t> patients, const std::vector<PatientRows>& rows, bool training,
               std::span<const std::size_t> columns) {
  Dataset d;
  d.p = columns.size();
  std::vector<double> buf(columns.size());
  for (auto p : patients) {
    for (const auto& r : training ? rows[p].train : rows[p].eval) {
      for (std::size_t j = 0; j < columns.size(); ++j) buf[j] = r.values[columns[j]];
      d.push_back(buf, r.label);
    }
  }
  return d;
}

std::vector<std::size_t> sample_candidates(std::size_t grid_size, std::size_t budget, Rng rng) {
  std::vector<std::size_t> idx(grid_size);
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t take = std::min(grid_size, budget);
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(grid_size - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  return idx;
}

LevelMetrics level_metrics(std::span<const int> truth, std::span<const double> score, std::span<const int> pred,
                           std::span<const std::optional<int>> gold) {
  LevelMetrics m;
  m.auroc = auroc(truth, score);
  m.confusion = confusion(truth, pred);
  m.rates = rates(m.confusion);
  m.se_by_gold = sensitivity_by_grade(truth, pred, gold);
  return m;
}

} // namespace

NestedCvReport nested_cv(std::span<const RecordingBiomarkers> cohort, ModelKind kind, ClassifierKind classifier,
                         const NestedCvParams& prm) {
  if (prm.n_outer == 0 || prm.n_inner < 2) throw Error("nested CV needs n_outer >= 1 and n_inner >= 2");
  if (!(prm.test_fraction > 0 && prm.test_fraction < 1)) throw Error("test fraction must lie in (0, 1)");
  const std::size_t n_patients = cohort.size();
  {
    std::set<std::string> ids;
    for (const auto& c : cohort) {
      if (!ids.insert(c.recording.patient_id).second) throw Error("duplicate patient id " + c.recording.patient_id);
    }
  }

  std::vector<PatientRows> rows(n_patients);
  parallel_for(n_patients, prm.jobs, [&](std::size_t p) {
    rows[p].train = rows_for(cohort[p], true, kind, prm.windows);
    rows[p].eval = rows_for(cohort[p], false, kind, prm.windows);
  });
  const auto all_columns = feature_names(kind);

  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t p = 0; p < n_patients; ++p) by_class[cohort[p].recording.label.is_copd ? 1 : 0].push_back(p);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < prm.n_outer) {
      throw Error("stratification failure: need at least " + std::to_string(prm.n_outer) + " patients per class");
    }
  }

  std::vector<Candidate> grid;
  if (classifier == ClassifierKind::lr) {
    for (const auto& h : lr_grid(prm.lr_base)) grid.push_back({ClassifierKind::lr, h, {}});
  } else {
    for (const auto& h : rf_grid()) grid.push_back({ClassifierKind::rf, {}, h});
  }
  const std::size_t k_select = prm.n_select.value_or(default_selection_size(kind));

  const Rng root(prm.seed);
  NestedCvReport report;
  report.model_kind = kind;
  report.classifier = classifier;
  report.window_length_s = prm.windows.length_s;

  for (std::size_t o = 0; o < prm.n_outer; ++o) {
    const Rng fold_rng = root.split(o);
    OuterFold fold;
    fold.index = o;

    // stratified patient hold-out
    std::vector<std::size_t> train, test;
    {
      Rng r = fold_rng.split(kOuterSplit);
      for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t> members = by_class[c];
        r.shuffle(std::span<std::size_t>(members));
        const auto n_c = members.size();
        const auto n_test = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(prm.test_fraction * static_cast<double>(n_c))), 1, n_c - 1);
        if (n_c - n_test < prm.n_inner) {
          throw Error("stratification failure: too few patients of one class for the inner folds");
        }
        test.insert(test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
        train.insert(train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
      }
      std::sort(train.begin(), train.end());
      std::sort(test.begin(), test.end());
    }
    for (auto p : train) fold.train_patients.push_back(cohort[p].recording.patient_id);
    for (auto p : test) fold.test_patients.push_back(cohort[p].recording.patient_id);

    // feature selection on the augmented training windows
    std::vector<std::size_t> identity(all_columns.size());
    std::iota(identity.begin(), identity.end(), 0);
    std::vector<std::size_t> columns = identity;
    if (k_select > 0 && k_select < all_columns.size()) {
      FeatureMatrix tm;
      tm.columns = all_columns;
      for (auto p : train) tm.rows.insert(tm.rows.end(), rows[p].train.begin(), rows[p].train.end());
      fold.selection = mrmr_select(tm, k_select, prm.mi_bins, prm.jobs);
      columns = fold.selection->indices;
    }
    for (auto j : columns) fold.features.push_back(all_columns[j]);
    for (auto p : train) {
      const double hop = window_hop_s(cohort[p].recording, true, prm.windows);
      for (const auto& r : rows[p].train) {
        fold.train_windows.push_back({r.patient_id, hop * static_cast<double>(r.window_index)});
      }
    }

    // inner folds, stratified by patient
    std::vector<std::vector<std::size_t>> inner_val(prm.n_inner);
    {
      Rng r = fold_rng.split(kInnerSplit);
      for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t> members;
        for (auto p : train) {
          if ((cohort[p].recording.label.is_copd ? 1 : 0) == c) members.push_back(p);
        }
        r.shuffle(std::span<std::size_t>(members));
        for (std::size_t i = 0; i < members.size(); ++i) inner_val[i % prm.n_inner].push_back(members[i]);
      }
    }
    std::vector<Dataset> inner_train_data(prm.n_inner), inner_val_data(prm.n_inner);
    for (std::size_t f = 0; f < prm.n_inner; ++f) {
      std::sort(inner_val[f].begin(), inner_val[f].end());
      std::vector<std::size_t> inner_train;
      std::set_difference(train.begin(), train.end(), inner_val[f].begin(), inner_val[f].end(),
                          std::back_inserter(inner_train));
      InnerSplit split;
      for (auto p : inner_train) split.train.push_back(cohort[p].recording.patient_id);
      for (auto p : inner_val[f]) split.validation.push_back(cohort[p].recording.patient_id);
      fold.inner.push_back(std::move(split));
      inner_train_data[f] = gather(inner_train, rows, true, columns);
      inner_val_data[f] = gather(inner_val[f], rows, false, columns);
      const auto z = Standardizer::fit(inner_train_data[f]);
      z.apply(inner_train_data[f]);
      z.apply(inner_val_data[f]);
    }

    // random search
    const auto picks = sample_candidates(grid.size(), prm.search_budget, fold_rng.split(kSearch));
    for (auto i : picks) fold.candidates.push_back(grid[i]);
    const std::size_t units = fold.candidates.size() * prm.n_inner;
    std::vector<double> unit_auroc(units);
    parallel_for(units, prm.jobs, [&](std::size_t u) {
      const std::size_t c = u / prm.n_inner, f = u % prm.n_inner;
      const auto& cand = fold.candidates[c];
      const Fitted model = fit(cand, inner_train_data[f], fold_rng.split(kInnerFit).split(c).split(f), 1);
      const auto& val = inner_val_data[f];
      std::vector<double> score(val.n);
      for (std::size_t i = 0; i < val.n; ++i) score[i] = predict(cand, model, val.row(i));
      unit_auroc[u] = auroc(val.y, score);
    });
    fold.candidate_auroc.assign(fold.candidates.size(), 0.0);
    for (std::size_t c = 0; c < fold.candidates.size(); ++c) {
      double s = 0;
      for (std::size_t f = 0; f < prm.n_inner; ++f) s += unit_auroc[c * prm.n_inner + f];
      fold.candidate_auroc[c] = s / static_cast<double>(prm.n_inner);
      if (fold.candidate_auroc[c] > fold.candidate_auroc[fold.best]) fold.best = c;
    }

    // refit on the whole training split
    const auto& best = fold.candidates[fold.best];
    Dataset train_data = gather(train, rows, true, columns);
    TrainedModel& model = fold.model;
    model.model_kind = kind;
    model.classifier = classifier;
    model.features = fold.features;
    model.standardizer = Standardizer::fit(train_data);
    model.standardizer.apply(train_data);
    model.lr_hyper = best.lr;
    model.rf_hyper = best.rf;
    Fitted fitted = fit(best, train_data, fold_rng.split(kRefit), prm.jobs);
    model.lr = std::move(fitted.lr);
    model.rf = std::move(fitted.rf);

    // test windows and patients
    std::vector<double> buf(columns.size());
    for (auto p : test) {
      const auto& rec = cohort[p].recording;
      PatientPrediction pp;
      pp.patient_id = rec.patient_id;
      pp.label = rec.label.is_copd ? 1 : 0;
      pp.gold = rec.label.gold;
      std::vector<int> votes;
      double sum = 0;
      for (const auto& r : rows[p].eval) {
        for (std::size_t j = 0; j < columns.size(); ++j) buf[j] = r.values[columns[j]];
        WindowPrediction w;
        w.patient_id = r.patient_id;
        w.window_index = r.window_index;
        w.start_s = window_hop_s(rec, false, prm.windows) * static_cast<double>(r.window_index);
        w.label = r.label;
        w.probability = model.probability(buf);
        w.predicted = w.probability >= 0.5 ? 1 : 0;
        votes.push_back(w.predicted);
        sum += w.probability;
        fold.windows.push_back(std::move(w));
      }
      pp.windows = votes.size();
      pp.score = sum / static_cast<double>(votes.size());
      pp.predicted = majority_vote(votes);
      fold.patients.push_back(std::move(pp));
    }

    {
      std::vector<int> truth, pred;
      std::vector<double> score;
      std::vector<std::optional<int>> gold;
      std::unordered_map<std::string, std::optional<int>> gold_of;
      for (const auto& pp : fold.patients) gold_of[pp.patient_id] = pp.gold;
      for (const auto& w : fold.windows) {
        truth.push_back(w.label);
        pred.push_back(w.predicted);
        score.push_back(w.probability);
        gold.push_back(gold_of[w.patient_id]);
      }
      fold.window_metrics = level_metrics(truth, score, pred, gold);
      truth.clear();
      pred.clear();
      score.clear();
      gold.clear();
      for (const auto& pp : fold.patients) {
        truth.push_back(pp.label);
        pred.push_back(pp.predicted);
        score.push_back(pp.score);
        gold.push_back(pp.gold);
      }
      fold.patient_metrics = level_metrics(truth, score, pred, gold);
      fold.patient_roc = roc_curve(truth, score);
    }
    report.folds.push_back(std::move(fold));
  }

  const auto problems = hygiene_violations(report);
  if (!problems.empty()) throw Error("data leakage detected: " + problems.front());
  return report;
}

std::vector<std::string> hygiene_violations(const NestedCvReport& rep) {
  std::vector<std::string> out;
  const auto overlap = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::set<std::string> sa(a.begin(), a.end());
    for (const auto& x : b) {
      if (sa.count(x)) return x;
    }
    return std::string();
  };
  for (const auto& f : rep.folds) {
    const std::string fold = "outer fold " + std::to_string(f.index + 1);
    if (auto p = overlap(f.train_patients, f.test_patients); !p.empty()) {
      out.push_back(fold + ": patient " + p + " in both train and test");
    }
    std::set<std::string> test_ids(f.test_patients.begin(), f.test_patients.end());
    for (const auto& w : f.train_windows) {
      if (test_ids.count(w.patient_id)) out.push_back(fold + ": training window from test patient " + w.patient_id);
    }
    std::set<std::string> train_ids(f.train_patients.begin(), f.train_patients.end());
    for (const auto& w : f.windows) {
      if (train_ids.count(w.patient_id)) out.push_back(fold + ": test window from training patient " + w.patient_id);
      if (std::fmod(w.start_s, rep.window_length_s) != 0) {
        out.push_back(fold + ": overlapping test window for " + w.patient_id);
      }
    }
    for (std::size_t i = 0; i < f.inner.size(); ++i) {
      const auto& s = f.inner[i];
      if (auto p = overlap(s.train, s.validation); !p.empty()) {
        out.push_back(fold + ", inner fold " + std::to_string(i + 1) + ": patient " + p +
                      " in both train and validation");
      }
      for (const auto& id : s.validation) {
        if (!train_ids.count(id)) out.push_back(fold + ": validation patient " + id + " outside the training split");
      }
    }
  }
  return out;
}

std::vector<SummaryRow> summarize(const NestedCvReport& rep) {
  std::vector<std::pair<std::string, std::vector<double>>> series;
  const auto add = [&](const std::string& name, double v) {
    auto it = std::find_if(series.begin(), series.end(), [&](const auto& s) { return s.first == name; });
    if (it == series.end()) {
      series.push_back({name, {}});
      it = series.end() - 1;
    }
    it->second.push_back(v);
  };
  for (const char* level : {"patient", "window"}) {
    for (const auto& f : rep.folds) {
      const auto& m = std::string(level) == "patient" ? f.patient_metrics : f.window_metrics;
      const std::string p = std::string(level) + "_";
      add(p + "auroc", m.auroc);
      add(p + "f1", m.rates.f1);
      add(p + "kappa", m.rates.kappa);
      add(p + "se", m.rates.se);
      add(p + "sp", m.rates.sp);
      add(p + "ppv", m.rates.ppv);
      add(p + "npv", m.rates.npv);
    }
  }
  for (int g = 1; g <= 4; ++g) {
    for (const auto& f : rep.folds) {
      if (auto it = f.patient_metrics.se_by_gold.find(g); it != f.patient_metrics.se_by_gold.end()) {
        add("patient_se_gold" + std::to_string(g), it->second);
      }
    }
  }
  std::vector<SummaryRow> out;
  for (const auto& [name, v] : series) {
    SummaryRow r;
    r.metric = name;
    r.median = stats::median(v);
    r.sd = stats::sample_sd(v);
    r.mean = stats::mean(v);
    r.iqr = stats::percentile(v, 75) - stats::percentile(v, 25);
    out.push_back(r);
  }
  return out;
}

void write_summary(std::ostream& out, const NestedCvReport& rep) {
  using text::format_double;
  out << "model,classifier,metric,median,sd,mean,iqr\n";
  for (const auto& r : summarize(rep)) {
    out << to_string(rep.model_kind) << ',' << to_string(rep.classifier) << ',' << r.metric << ','
        << format_double(r.median) << ',' << format_double(r.sd) << ',' << format_double(r.mean) << ','
        << format_double(r.iqr) << '\n';
  }
}

void write_roc(std::ostream& out, std::span<const RocPoint> points) {
  using text::format_double;
  out << "fpr,tpr,threshold\n";
  for (const auto& p : points) {
    out << format_double(p.fpr) << ',' << format_double(p.tpr) << ',' << format_double(p.threshold) << '\n';
  }
}

void write_window_predictions(std::ostream& out, std::span<const WindowPrediction> rows) {
  using text::format_double;
  out << "patient_id,window_index,start_s,label,probability,predicted\n";
  for (const auto& w : rows) {
    out << w.patient_id << ',' << w.window_index << ',' << format_double(w.start_s) << ',' << w.label << ','
        << format_double(w.probability) << ',' << w.predicted << '\n';
  }
}

void write_patient_predictions(std::ostream& out, std::span<const PatientPrediction> rows) {
  using text::format_double;
  out << "patient_id,label,gold,score,predicted,windows\n";
  for (const auto& p : rows) {
    out << p.patient_id << ',' << p.label << ',' << (p.gold ? std::to_string(*p.gold) : "") << ','
        << format_double(p.score) << ',' << p.predicted << ',' << p.windows << '\n';
  }
}

void write_search(std::ostream& out, const OuterFold& f) {
  using text::format_double;
  out << "candidate,mean_auroc,selected,description\n";
  for (std::size_t c = 0; c < f.candidates.size(); ++c) {
    out << c + 1 << ',' << format_double(f.candidate_auroc[c]) << ',' << (c == f.best ? 1 : 0) << ','
        << f.candidates[c].describe() << '\n';
  }
}

} // namespace oxicopd
