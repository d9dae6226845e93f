#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oxicopd/recording.hpp"

namespace oxicopd {

enum class ProfileKind { healthy, osa_mild, osa_severe, copd_like, ovs_like };
std::string to_string(ProfileKind kind);
ProfileKind parse_profile_kind(std::string_view text);
bool is_copd_profile(ProfileKind kind);

struct SynthProfile {
  ProfileKind kind = ProfileKind::healthy;
  double baseline = 96;                   // %
  double desat_rate = 0;                  // events/h
  double desat_depth = 0;                 // % below baseline at the trough
  double desat_duration_s = 30;           // fall + recovery
  double sustained_hypoxemia_depth = 0;   // % below baseline on plateaus
  double rem_cluster_fraction = 0;        // share of the night spent on plateaus
  double noise_sd = 0.4;                  // %, marginal
  double noise_averaging_s = 4;           // correlation time of the noise
  std::uint64_t seed = 0;
  double fs = 1.0;
  double min_gap_s = 20;                  // between consecutive planted desaturations
  double ramp_s = 30;                     // plateau entry and exit
  double resolution = 0.1;                // output step in %, 1 = whole percent, 0 = continuous
};

/// Nominal parameters of each kind.
SynthProfile default_profile(ProfileKind kind, std::uint64_t seed = 0);

struct PlantedEvent {
  double start_s = 0, end_s = 0;
  std::string kind; // "desat" or "plateau"
};

struct SynthRecording {
  OximetryRecording recording;
  std::vector<PlantedEvent> log;
};

/// Deterministic in profile.seed. Demographics, label and PSG values are
/// drawn from kind-dependent distributions.
SynthRecording generate(const SynthProfile& profile, double duration_h, const std::string& patient_id = "synth");

/// Ground-truth annotations of generate(profile, duration_h).
std::vector<PlantedEvent> plant_log(const SynthProfile& profile, double duration_h);

/// Largest-remainder split of n into the given weights (ties to the earlier entry).
std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& weights);

struct CohortSpec {
  std::size_t n = 10;
  std::vector<std::pair<ProfileKind, double>> mix{{ProfileKind::healthy, 0.4},  {ProfileKind::osa_mild, 0.15},
                                                  {ProfileKind::osa_severe, 0.15}, {ProfileKind::copd_like, 0.2},
                                                  {ProfileKind::ovs_like, 0.1}};
  double hours_min = 6.0, hours_max = 8.0;
  bool jitter = true; // per-patient variation around the nominal profile
  std::uint64_t seed = 0;
};

/// Parses `kind=weight,kind=weight,...`.
std::vector<std::pair<ProfileKind, double>> parse_mix(std::string_view text);

/// Profile of patient `index` after per-patient jitter.
SynthProfile patient_profile(ProfileKind kind, const CohortSpec& spec, std::size_t index);

std::vector<SynthRecording> generate_cohort(const CohortSpec& spec, std::size_t jobs = 1);

/// Writes `<dir>/manifest.csv`, `<dir>/signals/<id>.txt` and `<dir>/plant_log.csv`.
void write_cohort(const std::filesystem::path& dir, const std::vector<SynthRecording>& cohort);

/// `patient_id,start_s,end_s,kind`
void write_plant_log(std::ostream& out, const std::vector<SynthRecording>& cohort);

} // namespace oxicopd
