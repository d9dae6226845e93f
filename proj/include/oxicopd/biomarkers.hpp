#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oxicopd/complexity.hpp"
#include "oxicopd/desat.hpp"
#include "oxicopd/periodicity.hpp"
#include "oxicopd/stat_biomarkers.hpp"

namespace oxicopd {

/// Every tunable of the oximetry biomarkers for one scope.
struct BiomarkerParams {
  StatParams stat;
  ComplexityParams complexity;
  std::size_t prsa_d = 10;
  SpectralParams spectral;
  DesatParams desat;
  double hypoxic_level = 90.0; // x of CT_x and CA_x
};

inline constexpr std::size_t kBiomarkerCount = 59;

/// Column names of one scope: general statistics, complexity, periodicity,
/// the desaturation family for the relative (`_rel`) and hard (`_hard`)
/// detectors, then hypoxic burden.
const std::array<std::string_view, kBiomarkerCount>& biomarker_names();

struct BiomarkerVector {
  std::array<double, kBiomarkerCount> values{};
  std::vector<std::string> warnings;

  double operator[](std::string_view name) const;
};

/// All 59 biomarkers of one preprocessed scope (a window or a whole recording).
/// The hard-detector level is the median of the same scope.
BiomarkerVector compute_biomarkers(std::span<const double> signal, double fs, const BiomarkerParams& params = {});

} // namespace oxicopd
