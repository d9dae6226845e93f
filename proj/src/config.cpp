#include "oxicopd/config.hpp"

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "oxicopd/error.hpp"
#include "oxicopd/text.hpp"

namespace oxicopd {

namespace {

struct Entry {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

double to_double(std::string_view v) {
  const auto d = text::parse_double(v);
  if (!d) throw Error("expected a number, got '" + std::string(v) + "'");
  return *d;
}

std::size_t to_size(std::string_view v) {
  const auto i = text::parse_int(v);
  if (!i || *i < 0) throw Error("expected a non-negative integer, got '" + std::string(v) + "'");
  return static_cast<std::size_t>(*i);
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error("expected true or false, got '" + std::string(v) + "'");
}

// `ref` maps a config to the field it edits
template <class Ref>
Entry number(Ref ref) {
  return {[ref](RunConfig& c, std::string_view v) { ref(c) = to_double(v); },
          [ref](const RunConfig& c) { return text::format_double(ref(const_cast<RunConfig&>(c))); }};
}

template <class Ref>
Entry count(Ref ref) {
  return {[ref](RunConfig& c, std::string_view v) { ref(c) = to_size(v); },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

std::string mix_text(const CohortSpec& s) {
  std::string out;
  for (const auto& [kind, w] : s.mix) {
    if (!out.empty()) out += ',';
    out += to_string(kind) + "=" + text::format_double(w);
  }
  return out;
}

const std::vector<std::pair<std::string, Entry>>& table() {
  static const std::vector<std::pair<std::string, Entry>> t = {
      {"seed",
       {[](RunConfig& c, std::string_view v) {
          c.seed = to_size(v);
        },
        [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"model_kind",
       {[](RunConfig& c, std::string_view v) { c.model_kind = parse_model_kind(v); },
        [](const RunConfig& c) { return to_string(c.model_kind); }}},
      {"classifier",
       {[](RunConfig& c, std::string_view v) { c.classifier = parse_classifier_kind(v); },
        [](const RunConfig& c) { return to_string(c.classifier); }}},
      {"preprocess.min_valid", number([](RunConfig& c) -> double& { return c.preprocess.min_valid; })},
      {"preprocess.max_valid", number([](RunConfig& c) -> double& { return c.preprocess.max_valid; })},
      {"preprocess.median_length", count([](RunConfig& c) -> std::size_t& { return c.preprocess.median_length; })},
      {"window.length_s", number([](RunConfig& c) -> double& { return c.windows.length_s; })},
      {"window.copd_train_hop_s", number([](RunConfig& c) -> double& { return c.windows.copd_train_hop_s; })},
      {"stat.percentile", number([](RunConfig& c) -> double& { return c.biomarkers.stat.percentile; })},
      {"stat.below_median", number([](RunConfig& c) -> double& { return c.biomarkers.stat.below_median; })},
      {"stat.zc_level",
       {[](RunConfig& c, std::string_view v) {
          if (v == "median") {
            c.biomarkers.stat.zc_level.reset();
          } else {
            c.biomarkers.stat.zc_level = to_double(v);
          }
        },
        [](const RunConfig& c) {
          return c.biomarkers.stat.zc_level ? text::format_double(*c.biomarkers.stat.zc_level) : std::string("median");
        }}},
      {"stat.delta_index_s", number([](RunConfig& c) -> double& { return c.biomarkers.stat.delta_index_s; })},
      {"complexity.m", count([](RunConfig& c) -> std::size_t& { return c.biomarkers.complexity.m; })},
      {"complexity.r_factor", number([](RunConfig& c) -> double& { return c.biomarkers.complexity.r_factor; })},
      {"complexity.ctm_rho", number([](RunConfig& c) -> double& { return c.biomarkers.complexity.ctm_rho; })},
      {"complexity.dfa_scale", count([](RunConfig& c) -> std::size_t& { return c.biomarkers.complexity.dfa_scale; })},
      {"periodicity.prsa_d", count([](RunConfig& c) -> std::size_t& { return c.biomarkers.prsa_d; })},
      {"periodicity.band_low", number([](RunConfig& c) -> double& { return c.biomarkers.spectral.band_low; })},
      {"periodicity.band_high", number([](RunConfig& c) -> double& { return c.biomarkers.spectral.band_high; })},
      {"periodicity.psd_method",
       {[](RunConfig& c, std::string_view v) {
          if (v == "welch") {
            c.biomarkers.spectral.method = PsdMethod::welch;
          } else if (v == "periodogram") {
            c.biomarkers.spectral.method = PsdMethod::periodogram;
          } else {
            throw Error("expected welch or periodogram");
          }
        },
        [](const RunConfig& c) {
          return std::string(c.biomarkers.spectral.method == PsdMethod::welch ? "welch" : "periodogram");
        }}},
      {"periodicity.welch_segment", count([](RunConfig& c) -> std::size_t& { return c.biomarkers.spectral.segment; })},
      {"periodicity.welch_overlap", number([](RunConfig& c) -> double& { return c.biomarkers.spectral.overlap; })},
      {"desat.relative_threshold", number([](RunConfig& c) -> double& { return c.biomarkers.desat.relative_threshold; })},
      {"desat.max_length_s", number([](RunConfig& c) -> double& { return c.biomarkers.desat.max_length_s; })},
      {"desat.hard_min_samples", count([](RunConfig& c) -> std::size_t& { return c.biomarkers.desat.hard_min_samples; })},
      {"hypoxic.level", number([](RunConfig& c) -> double& { return c.biomarkers.hypoxic_level; })},
      {"select.mi_bins", count([](RunConfig& c) -> std::size_t& { return c.cv.mi_bins; })},
      {"select.k",
       {[](RunConfig& c, std::string_view v) {
          if (v == "auto") {
            c.cv.n_select.reset();
          } else {
            c.cv.n_select = to_size(v);
          }
        },
        [](const RunConfig& c) { return c.cv.n_select ? std::to_string(*c.cv.n_select) : std::string("auto"); }}},
      {"cv.n_outer", count([](RunConfig& c) -> std::size_t& { return c.cv.n_outer; })},
      {"cv.n_inner", count([](RunConfig& c) -> std::size_t& { return c.cv.n_inner; })},
      {"cv.test_fraction", number([](RunConfig& c) -> double& { return c.cv.test_fraction; })},
      {"cv.search_budget", count([](RunConfig& c) -> std::size_t& { return c.cv.search_budget; })},
      {"lr.max_epochs", count([](RunConfig& c) -> std::size_t& { return c.cv.lr_base.max_epochs; })},
      {"lr.tolerance", number([](RunConfig& c) -> double& { return c.cv.lr_base.tolerance; })},
      {"synth.n", count([](RunConfig& c) -> std::size_t& { return c.synth.n; })},
      {"synth.mix",
       {[](RunConfig& c, std::string_view v) { c.synth.mix = parse_mix(v); },
        [](const RunConfig& c) { return mix_text(c.synth); }}},
      {"synth.hours_min", number([](RunConfig& c) -> double& { return c.synth.hours_min; })},
      {"synth.hours_max", number([](RunConfig& c) -> double& { return c.synth.hours_max; })},
      {"synth.jitter",
       {[](RunConfig& c, std::string_view v) { c.synth.jitter = to_bool(v); },
        [](const RunConfig& c) { return std::string(c.synth.jitter ? "true" : "false"); }}},
  };
  return t;
}

const Entry& entry(std::string_view key) {
  for (const auto& [k, e] : table()) {
    if (k == key) return e;
  }
  throw Error("unknown config key '" + std::string(key) + "'");
}

} // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  const Entry& e = entry(key);
  try {
    e.set(*this, text::trim(value));
  } catch (const Error& err) {
    throw Error("config key " + std::string(key) + ": " + err.what());
  }
}

std::string RunConfig::get(std::string_view key) const { return entry(key).get(*this); }

NestedCvParams RunConfig::cv_params(std::size_t jobs) const {
  NestedCvParams p = cv;
  p.windows = windows;
  p.seed = seed;
  p.jobs = jobs;
  return p;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& e : table()) k.push_back(e.first);
    return k;
  }();
  return keys;
}

void apply_config_text(RunConfig& config, std::string_view content, const std::string& origin) {
  std::set<std::string> seen;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    const std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string_view::npos) throw Error(where + ": expected key = value");
    const std::string key(text::trim(t.substr(0, eq)));
    if (!seen.insert(key).second) throw Error(where + ": key '" + key + "' given twice");
    try {
      config.set(key, t.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  apply_config_text(config, buffer.str(), path.string());
}

void apply_overrides(RunConfig& config, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw Error("override '" + a + "' is not key=value");
    config.set(text::trim(std::string_view(a).substr(0, eq)), std::string_view(a).substr(eq + 1));
  }
}

void write_config(std::ostream& out, const RunConfig& config) {
  for (const auto& [key, e] : table()) out << key << " = " << e.get(config) << '\n';
}

std::string config_text(const RunConfig& config) {
  std::ostringstream out;
  write_config(out, config);
  return out.str();
}

} // namespace oxicopd
