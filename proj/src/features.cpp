#include "oxicopd/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "oxicopd/error.hpp"
#include "oxicopd/parallel.hpp"
#include "oxicopd/text.hpp"

namespace oxicopd {

std::string to_string(ModelKind kind) { return "model" + std::to_string(static_cast<int>(kind)); }

ModelKind parse_model_kind(std::string_view s) {
  if (s == "model1" || s == "1") return ModelKind::model1;
  if (s == "model2" || s == "2") return ModelKind::model2;
  if (s == "model3" || s == "3") return ModelKind::model3;
  if (s == "model4" || s == "4") return ModelKind::model4;
  throw Error("unknown model kind '" + std::string(s) + "'");
}

std::vector<std::size_t> window_starts(std::size_t n, double fs, double length_s, double hop_s) {
  const auto len = static_cast<std::size_t>(std::llround(length_s * fs));
  const auto hop = static_cast<std::size_t>(std::llround(hop_s * fs));
  if (len == 0 || hop == 0) throw Error("window length and hop must hold at least one sample");
  std::vector<std::size_t> out;
  for (std::size_t start = 0; start + len <= n; start += hop) out.push_back(start);
  return out;
}

double window_hop_s(const OximetryRecording& rec, bool is_training, const WindowParams& p) {
  return is_training && rec.label.is_copd ? p.copd_train_hop_s : p.length_s;
}

std::vector<Window> make_windows(const OximetryRecording& rec, bool is_training, const WindowParams& p) {
  const auto starts = window_starts(rec.samples.size(), rec.fs, p.length_s, window_hop_s(rec, is_training, p));
  if (starts.empty()) {
    throw Error("patient " + rec.patient_id + ": recording shorter than one " + text::format_double(p.length_s) +
                " s window");
  }
  const auto len = static_cast<std::size_t>(std::llround(p.length_s * rec.fs));
  std::vector<Window> out;
  out.reserve(starts.size());
  for (std::size_t w = 0; w < starts.size(); ++w) {
    Window win;
    win.patient_id = rec.patient_id;
    win.window_index = w;
    win.start_s = static_cast<double>(starts[w]) / rec.fs;
    win.end_s = static_cast<double>(starts[w] + len) / rec.fs;
    win.samples.assign(rec.samples.begin() + static_cast<std::ptrdiff_t>(starts[w]),
                       rec.samples.begin() + static_cast<std::ptrdiff_t>(starts[w] + len));
    out.push_back(std::move(win));
  }
  return out;
}

std::vector<std::string> oximetry_feature_names() {
  std::vector<std::string> out;
  for (auto n : biomarker_names()) out.emplace_back(n);
  for (auto n : biomarker_names()) out.push_back(std::string(n) + "_overall");
  return out;
}

std::vector<std::string> demographic_feature_names() { return {"gender", "age", "weight", "height", "smoking"}; }

std::vector<std::string> psg_feature_names() { return {"ahi", "ai", "hi", "n1", "n2", "n3", "rem", "arousal", "se"}; }

std::vector<std::string> feature_names(ModelKind kind) {
  std::vector<std::string> out;
  const auto append = [&](std::vector<std::string> v) { out.insert(out.end(), v.begin(), v.end()); };
  switch (kind) {
  case ModelKind::model1: append(demographic_feature_names()); break;
  case ModelKind::model2: append(oximetry_feature_names()); break;
  case ModelKind::model3:
    append(oximetry_feature_names());
    append(demographic_feature_names());
    break;
  case ModelKind::model4:
    append(oximetry_feature_names());
    append(demographic_feature_names());
    append(psg_feature_names());
    break;
  }
  return out;
}

std::size_t feature_count(ModelKind kind) { return feature_names(kind).size(); }

std::vector<double> assemble_row(const BiomarkerVector& window, const BiomarkerVector& overall,
                                 const Demographics& d, const std::optional<PsgFeatures>& psg, ModelKind kind) {
  std::vector<double> row;
  row.reserve(feature_count(kind));
  const bool oxi = kind != ModelKind::model1;
  const bool demo = kind != ModelKind::model2;
  if (oxi) {
    row.insert(row.end(), window.values.begin(), window.values.end());
    row.insert(row.end(), overall.values.begin(), overall.values.end());
  }
  if (demo) {
    row.insert(row.end(), {static_cast<double>(d.gender), d.age, d.weight, d.height, static_cast<double>(d.smoking)});
  }
  if (kind == ModelKind::model4) {
    if (!psg) throw Error("model4 requires PSG features");
    row.insert(row.end(), {psg->ahi, psg->ai, psg->hi, psg->n1, psg->n2, psg->n3, psg->rem, psg->arousal, psg->se});
  }
  return row;
}

std::vector<double> featurize_window(const Window& window, double fs, const BiomarkerVector& overall,
                                     const Demographics& demographics, const std::optional<PsgFeatures>& psg,
                                     ModelKind kind, const BiomarkerParams& params) {
  if (kind == ModelKind::model1) return assemble_row(BiomarkerVector{}, overall, demographics, psg, kind);
  return assemble_row(compute_biomarkers(window.samples, fs, params), overall, demographics, psg, kind);
}

int majority_vote(std::span<const int> votes) {
  if (votes.empty()) throw Error("majority vote over no windows");
  const auto copd = std::count(votes.begin(), votes.end(), 1);
  const auto other = static_cast<std::ptrdiff_t>(votes.size()) - copd;
  return copd >= other ? 1 : 0;
}

std::size_t FeatureMatrix::column_index(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error("no feature column named " + std::string(name));
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> FeatureMatrix::column(std::size_t j) const {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = rows[i].values[j];
  return out;
}

std::vector<int> FeatureMatrix::labels() const {
  std::vector<int> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = rows[i].label;
  return out;
}

FeatureMatrix FeatureMatrix::select(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  for (const auto& n : names) idx.push_back(column_index(n));
  FeatureMatrix out;
  out.columns.assign(names.begin(), names.end());
  if (out.columns == columns) out.model_kind = model_kind;
  out.rows.reserve(rows.size());
  for (const auto& r : rows) {
    FeatureRow nr{r.patient_id, r.window_index, r.label, {}};
    nr.values.reserve(idx.size());
    for (auto j : idx) nr.values.push_back(r.values[j]);
    out.rows.push_back(std::move(nr));
  }
  return out;
}

void FeatureMatrix::validate() const {
  const std::set<std::string> unique(columns.begin(), columns.end());
  if (unique.size() != columns.size()) throw ValidationError("duplicate feature column names");
  if (model_kind && columns.size() != feature_count(*model_kind)) {
    throw ValidationError("column count does not match " + to_string(*model_kind));
  }
  for (const auto& r : rows) {
    if (r.values.size() != columns.size()) throw ValidationError("ragged feature row for " + r.patient_id);
    if (r.label != 0 && r.label != 1) throw ValidationError("label must be 0 or 1");
    for (double v : r.values) {
      if (!std::isfinite(v)) throw ValidationError("non-finite feature value for " + r.patient_id);
    }
  }
}

void write_feature_table(const std::filesystem::path& path, const FeatureMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write feature table " + path.string());
  out << "patient_id,window_index,label";
  for (const auto& c : m.columns) out << ',' << c;
  out << '\n';
  for (const auto& r : m.rows) {
    out << r.patient_id << ',' << r.window_index << ',' << r.label;
    for (double v : r.values) out << ',' << text::format_double(v);
    out << '\n';
  }
}

FeatureMatrix read_feature_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open feature table " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("feature table " + path.string() + " is empty");
  auto header = text::split(line);
  if (header.size() < 3 || header[0] != "patient_id" || header[1] != "window_index" || header[2] != "label") {
    throw ValidationError("feature table must start with patient_id,window_index,label");
  }
  FeatureMatrix m;
  m.columns.assign(header.begin() + 3, header.end());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line);
    if (cells.size() != header.size()) {
      throw ValidationError("feature table line " + std::to_string(lineno) + ": wrong cell count");
    }
    FeatureRow r;
    r.patient_id = cells[0];
    const auto w = text::parse_int(cells[1]);
    const auto l = text::parse_int(cells[2]);
    if (!w || *w < 0 || !l) throw ValidationError("feature table line " + std::to_string(lineno) + ": bad index");
    r.window_index = static_cast<std::size_t>(*w);
    r.label = static_cast<int>(*l);
    r.values.reserve(m.columns.size());
    for (std::size_t j = 3; j < cells.size(); ++j) {
      const auto v = text::parse_double(cells[j]);
      if (!v) throw ValidationError("feature table line " + std::to_string(lineno) + ": bad value");
      r.values.push_back(*v);
    }
    m.rows.push_back(std::move(r));
  }
  m.validate();
  return m;
}

void write_metadata(const std::filesystem::path& path, const std::map<std::string, std::string>& entries) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write metadata " + path.string());
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
}

std::map<std::string, std::string> read_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open metadata " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ValidationError("metadata line without '=': " + std::string(t));
    out[std::string(text::trim(t.substr(0, eq)))] = std::string(text::trim(t.substr(eq + 1)));
  }
  return out;
}

RecordingBiomarkers compute_recording_biomarkers(const OximetryRecording& raw, const PreprocessParams& pre,
                                                 const BiomarkerParams& params, const WindowParams& wp) {
  RecordingBiomarkers c;
  const auto& rec = c.recording;
  try {
    c.recording = preprocess(raw, pre);
    c.overall = compute_biomarkers(rec.samples, rec.fs, params);
    std::set<std::size_t> starts;
    for (bool training : {false, true}) {
      for (auto s : window_starts(rec.samples.size(), rec.fs, wp.length_s, window_hop_s(rec, training, wp))) {
        starts.insert(s);
      }
    }
    if (starts.empty()) throw Error("recording shorter than one window");
    const auto len = static_cast<std::size_t>(std::llround(wp.length_s * rec.fs));
    for (auto s : starts) {
      c.windows.emplace(s, compute_biomarkers(std::span(rec.samples).subspan(s, len), rec.fs, params));
    }
  } catch (const Error& e) {
    throw Error("patient " + raw.patient_id + ": " + e.what());
  }
  return c;
}

std::vector<FeatureRow> rows_for(const RecordingBiomarkers& c, bool is_training, ModelKind kind,
                                 const WindowParams& wp) {
  const auto& rec = c.recording;
  const auto starts = window_starts(rec.samples.size(), rec.fs, wp.length_s, window_hop_s(rec, is_training, wp));
  std::vector<FeatureRow> rows;
  rows.reserve(starts.size());
  for (std::size_t w = 0; w < starts.size(); ++w) {
    FeatureRow r;
    r.patient_id = rec.patient_id;
    r.window_index = w;
    r.label = rec.label.is_copd ? 1 : 0;
    r.values = assemble_row(c.windows.at(starts[w]), c.overall, rec.demographics, rec.psg, kind);
    rows.push_back(std::move(r));
  }
  return rows;
}

FeatureMatrix extract_features(std::span<const OximetryRecording> recordings, ModelKind kind, bool is_training,
                               const PreprocessParams& pre, const BiomarkerParams& params, const WindowParams& wp,
                               std::size_t jobs) {
  if (recordings.empty()) throw Error("no recordings to featurize");
  std::vector<std::vector<FeatureRow>> per(recordings.size());
  parallel_for(recordings.size(), jobs, [&](std::size_t i) {
    const auto& raw = recordings[i];
    if (kind == ModelKind::model4 && !raw.psg) throw Error("patient " + raw.patient_id + ": model4 requires PSG features");
    OximetryRecording rec;
    try {
      rec = preprocess(raw, pre);
    } catch (const Error& e) {
      throw Error("patient " + raw.patient_id + ": " + e.what());
    }
    const auto windows = make_windows(rec, is_training, wp);
    try {
      const BiomarkerVector overall =
          kind == ModelKind::model1 ? BiomarkerVector{} : compute_biomarkers(rec.samples, rec.fs, params);
      for (const auto& w : windows) {
        per[i].push_back({rec.patient_id, w.window_index, rec.label.is_copd ? 1 : 0,
                          featurize_window(w, rec.fs, overall, rec.demographics, rec.psg, kind, params)});
      }
    } catch (const Error& e) {
      throw Error("patient " + rec.patient_id + ": " + e.what());
    }
  });
  FeatureMatrix m;
  m.columns = feature_names(kind);
  m.model_kind = kind;
  for (auto& v : per) {
    for (auto& r : v) m.rows.push_back(std::move(r));
  }
  m.validate();
  return m;
}

} // namespace oxicopd
