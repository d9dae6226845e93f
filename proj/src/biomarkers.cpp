#include "oxicopd/biomarkers.hpp"

#include <algorithm>

#include "oxicopd/error.hpp"
#include "oxicopd/summary_stats.hpp"

namespace oxicopd {

namespace {

constexpr std::array<std::string_view, kBiomarkerCount> kNames = {
    // general statistics
    "AV", "MED", "Min", "SD", "RG", "Px", "Mx", "ZCx", "DIx",
    // complexity
    "ApEn", "LZ", "CTM", "SampEn", "DFA",
    // periodicity
    "PRSAc", "PRSAad", "PRSAos", "PRSAsb", "PRSAsa", "AC", "PSD_total", "PSD_band", "PSD_ratio", "PSD_peak",
    // desaturations, relative detector
    "ODI_rel", "DL_mu_rel", "DL_sd_rel", "DDmax_mu_rel", "DDmax_sd_rel", "DD100_mu_rel", "DD100_sd_rel",
    "DS_mu_rel", "DS_sd_rel", "DAmax_mu_rel", "DAmax_sd_rel", "DA100_mu_rel", "DA100_sd_rel", "TD_mu_rel",
    "TD_sd_rel",
    // desaturations, hard detector
    "ODI_hard", "DL_mu_hard", "DL_sd_hard", "DDmax_mu_hard", "DDmax_sd_hard", "DD100_mu_hard", "DD100_sd_hard",
    "DS_mu_hard", "DS_sd_hard", "DAmax_mu_hard", "DAmax_sd_hard", "DA100_mu_hard", "DA100_sd_hard", "TD_mu_hard",
    "TD_sd_hard",
    // hypoxic burden
    "POD", "AODmax", "AOD100", "CTx", "CAx"};

void append_desat(double*& out, const DesatBiomarkers& d) {
  for (double v : {d.odi, d.dl_mean, d.dl_sd, d.ddmax_mean, d.ddmax_sd, d.dd100_mean, d.dd100_sd, d.ds_mean, d.ds_sd,
                   d.damax_mean, d.damax_sd, d.da100_mean, d.da100_sd, d.td_mean, d.td_sd}) {
    *out++ = v;
  }
}

} // namespace

const std::array<std::string_view, kBiomarkerCount>& biomarker_names() { return kNames; }

double BiomarkerVector::operator[](std::string_view name) const {
  const auto it = std::find(kNames.begin(), kNames.end(), name);
  if (it == kNames.end()) throw Error("unknown biomarker " + std::string(name));
  return values[static_cast<std::size_t>(it - kNames.begin())];
}

BiomarkerVector compute_biomarkers(std::span<const double> s, double fs, const BiomarkerParams& p) {
  BiomarkerVector bv;
  double* out = bv.values.data();

  const auto st = stat_biomarkers(s, fs, p.stat);
  for (double v : {st.av, st.med, st.min, st.sd, st.rg, st.px, st.mx, st.zc, st.delta_index}) *out++ = v;
  if (st.delta_index_short) bv.warnings.emplace_back("delta index: fewer than two segments");

  const auto cx = complexity_biomarkers(s, p.complexity);
  for (double v : {cx.apen, cx.lz, cx.ctm, cx.sampen, cx.dfa}) *out++ = v;
  if (cx.sampen_capped) bv.warnings.emplace_back("sample entropy: no template matches, capped value");

  const auto pr = prsa(s, fs, p.prsa_d);
  for (double v : {pr.capacity, pr.amplitude, pr.slope_overall, pr.slope_before, pr.slope_after}) *out++ = v;
  if (pr.no_anchors) bv.warnings.emplace_back("PRSA: no anchors");

  const auto sp = spectral(s, fs, p.spectral);
  for (double v : {sp.ac, sp.psd_total, sp.psd_band, sp.psd_ratio, sp.psd_peak}) *out++ = v;

  const auto rel = detect_relative(s, fs, p.desat.relative_threshold, p.desat.max_length_s);
  append_desat(out, desat_biomarkers(rel, s, fs));
  const auto hard = detect_hard(s, fs, st.med, p.desat.hard_min_samples);
  append_desat(out, desat_biomarkers(hard, s, fs));

  const auto hb = hypoxic_burden(s, fs, rel, p.hypoxic_level);
  for (double v : {hb.pod, hb.aod_max, hb.aod_100, hb.ct, hb.ca}) *out++ = v;

  if (out != bv.values.data() + kBiomarkerCount) throw Error("biomarker layout mismatch");
  return bv;
}

} // namespace oxicopd
