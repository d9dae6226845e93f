#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "oxicopd/biomarkers.hpp"
#include "oxicopd/features.hpp"
#include "oxicopd/model_store.hpp"
#include "oxicopd/nested_cv.hpp"
#include "oxicopd/preprocess.hpp"
#include "oxicopd/synth.hpp"

namespace oxicopd {

/// Every tunable of a run. Worker count is deliberately absent: it never
/// changes results, so it is not part of the reproducible configuration.
struct RunConfig {
  PreprocessParams preprocess;
  BiomarkerParams biomarkers;
  WindowParams windows;
  ModelKind model_kind = ModelKind::model3;
  ClassifierKind classifier = ClassifierKind::rf;
  NestedCvParams cv; // windows, seed and jobs inside are overwritten from the fields above
  CohortSpec synth;
  std::uint64_t seed = 0;

  /// Sets one key from its text value; throws on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  /// Effective value of a key in its canonical text form.
  std::string get(std::string_view key) const;

  /// Nested-CV parameters with the shared window, seed and jobs settings applied.
  NestedCvParams cv_params(std::size_t jobs) const;
};

/// All keys in echo order.
const std::vector<std::string>& config_keys();

/// `key = value` lines; `#` starts a comment line. Unknown or repeated keys are errors.
void apply_config_text(RunConfig& config, std::string_view text, const std::string& origin = "config");
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Applies `key=value` overrides in order.
void apply_overrides(RunConfig& config, const std::vector<std::string>& assignments);

/// Every key with its effective value, one per line, in config_keys() order.
void write_config(std::ostream& out, const RunConfig& config);
std::string config_text(const RunConfig& config);

} // namespace oxicopd
