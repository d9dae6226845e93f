#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oxicopd/features.hpp"
#include "oxicopd/forest.hpp"
#include "oxicopd/logistic.hpp"

namespace oxicopd {

enum class ClassifierKind { lr, rf };
std::string to_string(ClassifierKind kind);
ClassifierKind parse_classifier_kind(std::string_view text);

/// A fitted classifier plus everything needed to score a feature table.
struct TrainedModel {
  ModelKind model_kind = ModelKind::model3;
  ClassifierKind classifier = ClassifierKind::rf;
  std::vector<std::string> features; // columns the classifier consumes, in order
  Standardizer standardizer;
  LrHyper lr_hyper;
  RfHyper rf_hyper;
  LrModel lr;
  Forest rf;

  /// COPD probability of one row laid out as `features`.
  double probability(std::span<const double> row) const;
  /// Scores every row. The table must carry exactly the model's selected
  /// columns or exactly the full column set of its model kind.
  std::vector<double> score(const FeatureMatrix& table) const;
};

inline constexpr int kModelFormatVersion = 1;

void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

} // namespace oxicopd
