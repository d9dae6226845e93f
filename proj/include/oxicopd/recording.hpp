#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace oxicopd {

enum class Gender { male = 0, female = 1 };
enum class Smoking { non_smoker = 0, smoker = 1, ex_smoker = 2 };

struct CopdLabel {
  bool is_copd = false;
  std::optional<int> gold; // 1..4, only when is_copd

  void validate() const;
};

/// GOLD grade from post-bronchodilator % predicted FEV1.
int gold_from_fev1(double fev1_percent_predicted);

struct Demographics {
  Gender gender = Gender::male;
  double age = 0;    // years
  double weight = 0; // kg
  double height = 0; // cm
  Smoking smoking = Smoking::non_smoker;

  void validate() const;
};

struct PsgFeatures {
  double ahi = 0, ai = 0, hi = 0;          // events/h
  double n1 = 0, n2 = 0, n3 = 0, rem = 0;  // % of TST
  double arousal = 0;                      // arousals/h
  double se = 0;                           // %

  static constexpr double kStageSumTolerance = 0.5;
  void validate() const;
};

struct OximetryRecording {
  std::string patient_id;
  std::vector<double> samples; // SpO2, %
  double fs = 1.0;             // Hz
  CopdLabel label;
  Demographics demographics;
  std::optional<PsgFeatures> psg;

  double duration_s() const { return static_cast<double>(samples.size()) / fs; }
  void validate() const;
};

/// Reads a single-column SpO2 text file (one decimal per line).
std::vector<double> read_signal_file(const std::filesystem::path& path);
void write_signal_file(const std::filesystem::path& path, const std::vector<double>& samples);

/// Loads every row of a recording manifest. Signal paths are resolved relative
/// to the manifest directory. Throws ValidationError naming the 1-based data
/// row on the first bad row.
std::vector<OximetryRecording> load_manifest(const std::filesystem::path& path);

/// Writes a manifest; signal paths are written as given in `signal_paths`.
void write_manifest(const std::filesystem::path& path,
                    const std::vector<OximetryRecording>& recordings,
                    const std::vector<std::string>& signal_paths);

inline constexpr const char* kManifestHeader =
    "patient_id,signal_path,fs,is_copd,gold,gender,age,weight,height,smoking,"
    "ahi,ai,hi,n1,n2,n3,rem,arousal,se";

} // namespace oxicopd
