#include "oxicopd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "oxicopd/error.hpp"
#include "oxicopd/parallel.hpp"
#include "oxicopd/rng.hpp"
#include "oxicopd/text.hpp"

namespace oxicopd {

namespace {

constexpr std::pair<ProfileKind, const char*> kKindNames[] = {{ProfileKind::healthy, "healthy"},
                                                              {ProfileKind::osa_mild, "osa_mild"},
                                                              {ProfileKind::osa_severe, "osa_severe"},
                                                              {ProfileKind::copd_like, "copd_like"},
                                                              {ProfileKind::ovs_like, "ovs_like"}};

// Streams of the per-recording generator
enum : std::uint64_t { kNoise = 1, kDesats = 2, kPlateaus = 3, kPatient = 4 };

void validate(const SynthProfile& p) {
  if (!(p.baseline > 50 && p.baseline <= 100)) throw Error("profile baseline must be in (50, 100]");
  for (double v : {p.desat_rate, p.desat_depth, p.desat_duration_s, p.sustained_hypoxemia_depth, p.noise_sd,
                   p.min_gap_s, p.ramp_s, p.noise_averaging_s, p.resolution}) {
    if (!(v >= 0) || !std::isfinite(v)) throw Error("profile rates, depths and durations must be >= 0");
  }
  if (!(p.rem_cluster_fraction >= 0 && p.rem_cluster_fraction < 1)) {
    throw Error("rem_cluster_fraction must be in [0, 1)");
  }
  if (!(p.fs > 0)) throw Error("profile fs must be positive");
}

// Plateaus sit at the end of each ~90 min sleep cycle, growing longer through
// the night like REM periods; their total hold time is fraction * duration.
std::vector<PlantedEvent> plan_plateaus(const SynthProfile& p, double total_s, Rng rng) {
  std::vector<PlantedEvent> out;
  if (p.rem_cluster_fraction <= 0 || p.sustained_hypoxemia_depth <= 0) return out;
  const double cycle = 90 * 60;
  const auto cycles = std::max<std::size_t>(1, static_cast<std::size_t>(total_s / cycle));
  std::vector<double> weight(cycles);
  for (std::size_t c = 0; c < cycles; ++c) weight[c] = 1.0 + 0.5 * static_cast<double>(c) + 0.3 * rng.uniform();
  const double wsum = std::accumulate(weight.begin(), weight.end(), 0.0);
  const double budget = p.rem_cluster_fraction * total_s;
  const double span = total_s / static_cast<double>(cycles);
  for (std::size_t c = 0; c < cycles; ++c) {
    const double len = std::min(budget * weight[c] / wsum, 0.9 * span);
    const double end = span * static_cast<double>(c + 1) - 0.05 * span;
    out.push_back({std::max(0.0, end - len), end, "plateau"});
  }
  return out;
}

std::vector<PlantedEvent> plan_desats(const SynthProfile& p, double total_s, Rng rng) {
  std::vector<PlantedEvent> out;
  if (p.desat_rate <= 0 || p.desat_depth <= 0) return out;
  const double mean_gap = std::max(1.0, 3600.0 / p.desat_rate - p.desat_duration_s - p.min_gap_s);
  double t = p.min_gap_s + rng.exponential(1.0 / mean_gap);
  while (t + p.desat_duration_s < total_s) {
    out.push_back({t, t + p.desat_duration_s, "desat"});
    t += p.desat_duration_s + p.min_gap_s + rng.exponential(1.0 / mean_gap);
  }
  return out;
}

struct Plan {
  std::vector<PlantedEvent> plateaus, desats;
};

Plan plan(const SynthProfile& p, double duration_h) {
  validate(p);
  if (!(duration_h > 0)) throw Error("duration must be positive");
  const double total_s = duration_h * 3600.0;
  const Rng rng(p.seed);
  return {plan_plateaus(p, total_s, rng.split(kPlateaus)), plan_desats(p, total_s, rng.split(kDesats))};
}

// 0 outside, 1 on the hold, linear ramps of ramp_s on both sides of the interval
double plateau_weight(double t, const PlantedEvent& e, double ramp) {
  if (t < e.start_s - ramp || t >= e.end_s + ramp) return 0;
  if (t < e.start_s) return ramp > 0 ? (t - (e.start_s - ramp)) / ramp : 1;
  if (t < e.end_s) return 1;
  return ramp > 0 ? (e.end_s + ramp - t) / ramp : 1;
}

void draw_demographics(OximetryRecording& rec, ProfileKind kind, Rng rng) {
  const bool copd = is_copd_profile(kind);
  auto& d = rec.demographics;
  d.gender = rng.bernoulli(copd ? 0.65 : 0.55) ? Gender::male : Gender::female;
  d.age = std::clamp(rng.normal(copd ? 64 : 56, 10), 25.0, 90.0);
  const bool male = d.gender == Gender::male;
  d.height = std::clamp(rng.normal(male ? 175 : 162, 7), 140.0, 205.0);
  const double bmi = std::clamp(rng.normal(kind == ProfileKind::healthy ? 26 : 29, 4), 17.0, 50.0);
  d.weight = bmi * (d.height / 100) * (d.height / 100);
  const double u = rng.uniform();
  if (copd) {
    d.smoking = u < 0.45 ? Smoking::ex_smoker : u < 0.8 ? Smoking::smoker : Smoking::non_smoker;
  } else {
    d.smoking = u < 0.3 ? Smoking::ex_smoker : u < 0.5 ? Smoking::smoker : Smoking::non_smoker;
  }
  if (copd) {
    const double g = rng.uniform();
    rec.label = {true, g < 0.2 ? 1 : g < 0.65 ? 2 : g < 0.9 ? 3 : 4};
  } else {
    rec.label = {false, std::nullopt};
  }
}

PsgFeatures draw_psg(const SynthProfile& p, Rng rng) {
  PsgFeatures s;
  s.ahi = std::max(0.0, p.desat_rate * rng.uniform(0.7, 1.2) + rng.uniform(0, 4));
  const double share = rng.uniform(0.2, 0.5);
  s.ai = s.ahi * share;
  s.hi = s.ahi - s.ai;
  s.rem = std::clamp(rng.normal(20, 4), 5.0, 30.0);
  s.n3 = std::clamp(rng.normal(15, 5), 0.0, 30.0);
  s.n1 = std::clamp(rng.normal(p.desat_rate > 15 ? 14 : 8, 3), 1.0, 25.0);
  s.n2 = std::max(0.0, 100.0 - s.rem - s.n3 - s.n1 - rng.uniform(0, 3));
  s.arousal = std::max(0.0, rng.normal(10 + 0.6 * p.desat_rate, 4));
  s.se = std::clamp(rng.normal(p.kind == ProfileKind::healthy ? 88 : 80, 6), 40.0, 99.0);
  return s;
}

} // namespace

std::string to_string(ProfileKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

ProfileKind parse_profile_kind(std::string_view s) {
  for (const auto& [k, name] : kKindNames) {
    if (s == name) return k;
  }
  throw Error("unknown profile '" + std::string(s) +
              "' (expected healthy, osa_mild, osa_severe, copd_like or ovs_like)");
}

bool is_copd_profile(ProfileKind kind) { return kind == ProfileKind::copd_like || kind == ProfileKind::ovs_like; }

SynthProfile default_profile(ProfileKind kind, std::uint64_t seed) {
  SynthProfile p;
  p.kind = kind;
  p.seed = seed;
  switch (kind) {
  case ProfileKind::healthy:
    p.baseline = 96.5;
    p.desat_rate = 2;
    p.desat_depth = 3.5;
    p.desat_duration_s = 30;
    break;
  case ProfileKind::osa_mild:
    p.baseline = 95.5;
    p.desat_rate = 10;
    p.desat_depth = 4;
    p.desat_duration_s = 35;
    break;
  case ProfileKind::osa_severe:
    p.baseline = 95;
    p.desat_rate = 30;
    p.desat_depth = 5;
    p.desat_duration_s = 40;
    break;
  case ProfileKind::copd_like:
    p.baseline = 92.5;
    p.desat_rate = 4;
    p.desat_depth = 3.5;
    p.desat_duration_s = 45;
    p.sustained_hypoxemia_depth = 5;
    p.rem_cluster_fraction = 0.2;
    p.noise_sd = 0.5;
    break;
  case ProfileKind::ovs_like:
    p.baseline = 92.5;
    p.desat_rate = 20;
    p.desat_depth = 4.5;
    p.desat_duration_s = 45;
    p.sustained_hypoxemia_depth = 5;
    p.rem_cluster_fraction = 0.15;
    p.noise_sd = 0.5;
    break;
  }
  return p;
}

SynthRecording generate(const SynthProfile& p, double duration_h, const std::string& patient_id) {
  const Plan pl = plan(p, duration_h);
  const Rng rng(p.seed);
  const auto n = static_cast<std::size_t>(std::floor(duration_h * 3600.0 * p.fs));
  SynthRecording out;
  auto& rec = out.recording;
  rec.patient_id = patient_id;
  rec.fs = p.fs;
  rec.samples.assign(n, p.baseline);
  auto& s = rec.samples;
  const auto idx = [&](double t) { return std::min(n, static_cast<std::size_t>(std::max(0.0, std::ceil(t * p.fs)))); };

  for (const auto& e : pl.plateaus) {
    for (std::size_t i = idx(e.start_s - p.ramp_s); i < idx(e.end_s + p.ramp_s); ++i) {
      const double t = static_cast<double>(i) / p.fs;
      s[i] -= p.sustained_hypoxemia_depth * plateau_weight(t, e, p.ramp_s);
    }
  }
  // V shape: falls over 60 % of the event, recovers over the rest
  for (const auto& e : pl.desats) {
    const double fall = 0.6 * (e.end_s - e.start_s);
    const double rise = (e.end_s - e.start_s) - fall;
    for (std::size_t i = idx(e.start_s); i < idx(e.end_s); ++i) {
      const double t = static_cast<double>(i) / p.fs - e.start_s;
      const double shape = t < fall ? t / fall : 1.0 - (t - fall) / rise;
      s[i] -= p.desat_depth * std::clamp(shape, 0.0, 1.0);
    }
  }
  // oximeters average over a few seconds, so the noise is AR(1) with marginal sd noise_sd
  Rng noise = rng.split(kNoise);
  const double phi = std::exp(-1.0 / (p.noise_averaging_s * p.fs));
  const double innov = p.noise_sd * std::sqrt(1 - phi * phi);
  double e = p.noise_sd > 0 ? noise.normal(0, p.noise_sd) : 0;
  for (auto& v : s) {
    if (p.noise_sd > 0) {
      v += e;
      e = phi * e + noise.normal(0, innov);
    }
    if (p.resolution > 0) v = std::round(v / p.resolution) * p.resolution;
    v = std::clamp(v, 50.0, 100.0);
  }

  out.log = pl.plateaus;
  out.log.insert(out.log.end(), pl.desats.begin(), pl.desats.end());
  std::stable_sort(out.log.begin(), out.log.end(),
                   [](const PlantedEvent& a, const PlantedEvent& b) { return a.start_s < b.start_s; });

  Rng patient = rng.split(kPatient);
  draw_demographics(rec, p.kind, patient.split(1));
  rec.psg = draw_psg(p, patient.split(2));
  rec.validate();
  return out;
}

std::vector<PlantedEvent> plant_log(const SynthProfile& p, double duration_h) {
  const Plan pl = plan(p, duration_h);
  std::vector<PlantedEvent> log = pl.plateaus;
  log.insert(log.end(), pl.desats.begin(), pl.desats.end());
  std::stable_sort(log.begin(), log.end(),
                   [](const PlantedEvent& a, const PlantedEvent& b) { return a.start_s < b.start_s; });
  return log;
}

std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (weights.empty() || !(total > 0)) throw Error("cohort mix needs a positive total weight");
  std::vector<std::size_t> counts(weights.size());
  std::vector<double> remainder(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0) throw Error("cohort mix weights must be >= 0");
    const double exact = static_cast<double>(n) * weights[i] / total;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % order.size()]];
  return counts;
}

std::vector<std::pair<ProfileKind, double>> parse_mix(std::string_view s) {
  std::vector<std::pair<ProfileKind, double>> out;
  for (const auto& item : text::split(s, ',')) {
    const auto parts = text::split(item, '=');
    if (parts.size() != 2) throw Error("cohort mix entries look like kind=weight, got '" + item + "'");
    const auto w = text::parse_double(parts[1]);
    if (!w || *w < 0) throw Error("bad cohort mix weight '" + parts[1] + "'");
    out.emplace_back(parse_profile_kind(text::trim(parts[0])), *w);
  }
  if (out.empty()) throw Error("empty cohort mix");
  return out;
}

SynthProfile patient_profile(ProfileKind kind, const CohortSpec& spec, std::size_t index) {
  Rng rng = Rng(spec.seed).split(index);
  SynthProfile p = default_profile(kind, rng());
  if (!spec.jitter) return p;
  Rng j = rng.split(9);
  p.baseline = std::min(99.0, p.baseline + j.normal(0, 0.8));
  p.desat_rate *= std::exp(j.normal(0, 0.3));
  p.desat_depth *= std::exp(j.normal(0, 0.15));
  p.desat_duration_s *= std::exp(j.normal(0, 0.15));
  p.sustained_hypoxemia_depth *= std::exp(j.normal(0, 0.2));
  p.rem_cluster_fraction = std::clamp(p.rem_cluster_fraction * std::exp(j.normal(0, 0.3)), 0.0, 0.5);
  p.noise_sd *= std::exp(j.normal(0, 0.2));
  return p;
}

std::vector<SynthRecording> generate_cohort(const CohortSpec& spec, std::size_t jobs) {
  if (spec.n == 0) throw Error("cohort size must be positive");
  if (!(spec.hours_min > 0 && spec.hours_max >= spec.hours_min)) throw Error("bad cohort duration range");
  std::vector<double> weights;
  for (const auto& m : spec.mix) weights.push_back(m.second);
  const auto counts = apportion(spec.n, weights);
  std::vector<ProfileKind> kinds;
  for (std::size_t k = 0; k < counts.size(); ++k) kinds.insert(kinds.end(), counts[k], spec.mix[k].first);

  std::vector<SynthRecording> out(spec.n);
  const int width = std::max<int>(3, static_cast<int>(std::to_string(spec.n).size()));
  parallel_for(spec.n, jobs, [&](std::size_t i) {
    const auto p = patient_profile(kinds[i], spec, i);
    Rng r = Rng(spec.seed).split(i).split(10);
    const double hours = spec.hours_min + (spec.hours_max - spec.hours_min) * r.uniform();
    std::string id = std::to_string(i + 1);
    id = "S" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(id.size()))), '0') + id;
    out[i] = generate(p, std::round(hours * 60) / 60, id);
  });
  return out;
}

void write_plant_log(std::ostream& out, const std::vector<SynthRecording>& cohort) {
  using text::format_double;
  out << "patient_id,start_s,end_s,kind\n";
  for (const auto& r : cohort) {
    for (const auto& e : r.log) {
      out << r.recording.patient_id << ',' << format_double(e.start_s) << ',' << format_double(e.end_s) << ','
          << e.kind << '\n';
    }
  }
}

void write_cohort(const std::filesystem::path& dir, const std::vector<SynthRecording>& cohort) {
  std::filesystem::create_directories(dir / "signals");
  std::vector<OximetryRecording> recs;
  std::vector<std::string> paths;
  for (const auto& r : cohort) {
    const std::string rel = "signals/" + r.recording.patient_id + ".txt";
    write_signal_file(dir / rel, r.recording.samples);
    recs.push_back(r.recording);
    paths.push_back(rel);
  }
  write_manifest(dir / "manifest.csv", recs, paths);
  std::ofstream log(dir / "plant_log.csv");
  if (!log) throw Error("cannot write plant log in " + dir.string());
  write_plant_log(log, cohort);
}

} // namespace oxicopd
