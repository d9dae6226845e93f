#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oxicopd/biomarkers.hpp"
#include "oxicopd/preprocess.hpp"
#include "oxicopd/recording.hpp"

namespace oxicopd {

enum class ModelKind { model1 = 1, model2 = 2, model3 = 3, model4 = 4 };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct WindowParams {
  double length_s = 7200.0;
  double copd_train_hop_s = 3600.0; // augmentation hop for COPD training recordings
};

struct Window {
  std::string patient_id;
  std::size_t window_index = 0;
  double start_s = 0;
  double end_s = 0;
  std::vector<double> samples;
};

/// Start offsets (samples) of every full window of `length_s` at hop `hop_s`.
std::vector<std::size_t> window_starts(std::size_t n_samples, double fs, double length_s, double hop_s);

/// Training COPD recordings use the augmentation hop; everything else is tiled
/// without overlap. Trailing partial windows are dropped.
std::vector<Window> make_windows(const OximetryRecording& recording, bool is_training, const WindowParams& params = {});

/// Hop used for a recording given its role.
double window_hop_s(const OximetryRecording& recording, bool is_training, const WindowParams& params);

std::vector<std::string> oximetry_feature_names(); // 59 per-window + 59 `_overall`
std::vector<std::string> demographic_feature_names();
std::vector<std::string> psg_feature_names();
std::vector<std::string> feature_names(ModelKind kind);
std::size_t feature_count(ModelKind kind);

/// Assembles one feature row from per-window and whole-recording biomarkers.
std::vector<double> assemble_row(const BiomarkerVector& window, const BiomarkerVector& overall,
                                 const Demographics& demographics, const std::optional<PsgFeatures>& psg,
                                 ModelKind kind);

std::vector<double> featurize_window(const Window& window, double fs, const BiomarkerVector& overall,
                                     const Demographics& demographics, const std::optional<PsgFeatures>& psg,
                                     ModelKind kind, const BiomarkerParams& params = {});

/// COPD iff COPD votes >= non-COPD votes.
int majority_vote(std::span<const int> window_predictions);

struct FeatureRow {
  std::string patient_id;
  std::size_t window_index = 0;
  int label = 0;
  std::vector<double> values;
};

struct FeatureMatrix {
  std::vector<std::string> columns;
  std::vector<FeatureRow> rows;
  std::optional<ModelKind> model_kind;

  std::size_t column_index(std::string_view name) const;
  std::vector<double> column(std::size_t j) const;
  std::vector<int> labels() const;
  /// Copy restricted to the named columns, in the given order.
  FeatureMatrix select(std::span<const std::string> names) const;
  /// Unique column names, rectangular, every value finite.
  void validate() const;
};

void write_feature_table(const std::filesystem::path& path, const FeatureMatrix& matrix);
FeatureMatrix read_feature_table(const std::filesystem::path& path);

void write_metadata(const std::filesystem::path& path, const std::map<std::string, std::string>& entries);
std::map<std::string, std::string> read_metadata(const std::filesystem::path& path);

/// Biomarker cache for one preprocessed recording: the whole-night vector and
/// the per-window vectors keyed by window start sample.
struct RecordingBiomarkers {
  OximetryRecording recording; // preprocessed
  BiomarkerVector overall;
  std::map<std::size_t, BiomarkerVector> windows;
};

/// Preprocesses and featurizes every window start that either role (training
/// or evaluation) can request.
RecordingBiomarkers compute_recording_biomarkers(const OximetryRecording& raw, const PreprocessParams& pre,
                                                 const BiomarkerParams& params, const WindowParams& windows);

/// Feature rows of one cached recording for the given role.
std::vector<FeatureRow> rows_for(const RecordingBiomarkers& cache, bool is_training, ModelKind kind,
                                 const WindowParams& windows);

/// preprocess -> window -> featurize for every recording, in manifest order.
FeatureMatrix extract_features(std::span<const OximetryRecording> recordings, ModelKind kind, bool is_training,
                               const PreprocessParams& pre, const BiomarkerParams& params,
                               const WindowParams& windows, std::size_t jobs = 1);

} // namespace oxicopd
