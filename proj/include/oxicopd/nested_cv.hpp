#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oxicopd/features.hpp"
#include "oxicopd/metrics.hpp"
#include "oxicopd/model_store.hpp"
#include "oxicopd/select.hpp"

namespace oxicopd {

struct NestedCvParams {
  std::size_t n_outer = 5;
  std::size_t n_inner = 5;
  double test_fraction = 0.2;
  std::size_t search_budget = 60;
  std::size_t mi_bins = 10;
  std::optional<std::size_t> n_select; // default per model kind when empty
  LrHyper lr_base;                     // epochs and tolerance for every grid point
  WindowParams windows;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

/// mRMR size per model kind: none for model1, 38 for model2, 35 otherwise.
std::size_t default_selection_size(ModelKind kind);

/// learning rate 1e-7 .. 1e-1 (decades) x l2 {0, 1e-4, 1e-3, 1e-2, 1e-1}.
std::vector<LrHyper> lr_grid(const LrHyper& base = {});
/// Full random-forest grid in a fixed enumeration order.
std::vector<RfHyper> rf_grid();

struct Candidate {
  ClassifierKind classifier = ClassifierKind::rf;
  LrHyper lr;
  RfHyper rf;
  std::string describe() const;
};

struct WindowPrediction {
  std::string patient_id;
  std::size_t window_index = 0;
  double start_s = 0;
  int label = 0;
  double probability = 0;
  int predicted = 0;
};

struct PatientPrediction {
  std::string patient_id;
  int label = 0;
  std::optional<int> gold;
  double score = 0; // mean window probability
  int predicted = 0; // majority vote
  std::size_t windows = 0;
};

struct LevelMetrics {
  double auroc = 0;
  Confusion confusion;
  Rates rates;
  std::map<int, double> se_by_gold;
};

struct InnerSplit {
  std::vector<std::string> train, validation;
};

struct WindowRef {
  std::string patient_id;
  double start_s = 0;
};

struct OuterFold {
  std::size_t index = 0;
  std::vector<std::string> train_patients, test_patients;
  std::vector<InnerSplit> inner;
  std::vector<WindowRef> train_windows;
  std::optional<MrmrResult> selection;
  std::vector<std::string> features;
  std::vector<Candidate> candidates;
  std::vector<double> candidate_auroc; // mean inner validation AUROC
  std::size_t best = 0;
  std::vector<WindowPrediction> windows;
  std::vector<PatientPrediction> patients;
  LevelMetrics window_metrics, patient_metrics;
  std::vector<RocPoint> patient_roc;
  TrainedModel model;
};

struct NestedCvReport {
  ModelKind model_kind = ModelKind::model3;
  ClassifierKind classifier = ClassifierKind::rf;
  double window_length_s = 7200;
  std::vector<OuterFold> folds;
};

/// Repeated stratified patient-level hold-out with an inner patient-stratified
/// k-fold random search. `cohort` holds cached biomarkers per recording.
NestedCvReport nested_cv(std::span<const RecordingBiomarkers> cohort, ModelKind kind, ClassifierKind classifier,
                         const NestedCvParams& params);

/// Every leakage problem found in a report: patients on both sides of a
/// train/test or train/validation boundary, or overlapping test windows.
std::vector<std::string> hygiene_violations(const NestedCvReport& report);

struct SummaryRow {
  std::string metric;
  double median = 0, sd = 0, mean = 0, iqr = 0;
};

/// Per-metric aggregates over outer folds (sd is the sample SD).
std::vector<SummaryRow> summarize(const NestedCvReport& report);

/// `model,classifier,metric,median,sd,mean,iqr`
void write_summary(std::ostream& out, const NestedCvReport& report);
/// `fpr,tpr,threshold`
void write_roc(std::ostream& out, std::span<const RocPoint> points);
/// `patient_id,window_index,start_s,label,probability,predicted`
void write_window_predictions(std::ostream& out, std::span<const WindowPrediction> rows);
/// `patient_id,label,gold,score,predicted,windows`
void write_patient_predictions(std::ostream& out, std::span<const PatientPrediction> rows);
/// `candidate,mean_auroc,selected,description`
void write_search(std::ostream& out, const OuterFold& fold);

} // namespace oxicopd
