#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace oxicopd {

/// One desaturation. `end_idx` is exclusive: the event covers samples
/// [start_idx, end_idx) and lasts (end_idx - start_idx) / fs seconds.
struct DesaturationEvent {
  std::size_t start_idx = 0;
  std::size_t min_idx = 0;
  std::size_t end_idx = 0;
  double baseline = 0;  // %
  double min_value = 0; // %
  double duration_s = 0;
  double depth_max = 0; // baseline - min
  double depth_100 = 0; // 100 - min
  double slope = 0;     // %/s, depth_max over time-to-minimum
  double area_max = 0;  // %.s between baseline and signal
  double area_100 = 0;  // %.s between 100 % and signal
};

struct DesatParams {
  double relative_threshold = 3.0; // %
  double max_length_s = 120.0;     // cap for relative events
  std::size_t hard_min_samples = 2;
};

/// ODI-style detector. The baseline is the most recent maximum within the
/// preceding max_length_s (and after the previous event); an event opens when
/// the signal falls at least `drop_threshold` below it and closes at the first
/// sample back at or above baseline - drop_threshold, or at the length cap.
std::vector<DesaturationEvent> detect_relative(std::span<const double> signal, double fs,
                                               double drop_threshold = 3.0, double max_length_s = 120.0);

/// Runs of at least `min_samples` consecutive samples strictly below `level`.
std::vector<DesaturationEvent> detect_hard(std::span<const double> signal, double fs, double level,
                                           std::size_t min_samples = 2);
/// Same, with the level set to the median of `signal`.
std::vector<DesaturationEvent> detect_hard(std::span<const double> signal, double fs);

/// Fills the geometry fields of an event from its indices and baseline.
DesaturationEvent make_event(std::span<const double> signal, double fs, std::size_t start, std::size_t min_idx,
                             std::size_t end, double baseline);

struct DesatBiomarkers {
  double odi = 0; // events/h
  double dl_mean = 0, dl_sd = 0;
  double ddmax_mean = 0, ddmax_sd = 0;
  double dd100_mean = 0, dd100_sd = 0;
  double ds_mean = 0, ds_sd = 0;
  double damax_mean = 0, damax_sd = 0;
  double da100_mean = 0, da100_sd = 0;
  double td_mean = 0, td_sd = 0;
};

DesatBiomarkers desat_biomarkers(std::span<const DesaturationEvent> events, std::span<const double> signal, double fs);

struct HypoxicBurden {
  double pod = 0;     // fraction of recording time in desaturation
  double aod_max = 0; // %
  double aod_100 = 0; // %
  double ct = 0;      // % of samples below level
  double ca = 0;      // mean deficit below level, %
};

HypoxicBurden hypoxic_burden(std::span<const double> signal, double fs, std::span<const DesaturationEvent> events,
                             double level = 90.0);

/// Debug dump: `start_idx,min_idx,end_idx,baseline,min_value,depth_max,slope,area_max,area_100`.
void write_event_dump(std::ostream& out, std::span<const DesaturationEvent> events);

} // namespace oxicopd
