#include "oxicopd/recording.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "oxicopd/error.hpp"
#include "oxicopd/text.hpp"

namespace oxicopd {

void CopdLabel::validate() const {
  if (gold && !is_copd) throw ValidationError("GOLD grade given for a non-COPD label");
  if (gold && (*gold < 1 || *gold > 4)) throw ValidationError("GOLD grade must be in 1..4");
}

int gold_from_fev1(double fev1) {
  if (!(fev1 >= 0)) throw ValidationError("FEV1 % predicted must be non-negative");
  if (fev1 >= 80) return 1;
  if (fev1 >= 50) return 2;
  if (fev1 >= 30) return 3;
  return 4;
}

void Demographics::validate() const {
  if (!(age > 0)) throw ValidationError("age must be positive");
  if (!(weight > 0)) throw ValidationError("weight must be positive");
  if (!(height > 0)) throw ValidationError("height must be positive");
}

void PsgFeatures::validate() const {
  for (double v : {ahi, ai, hi, n1, n2, n3, rem, arousal, se}) {
    if (!(v >= 0) || !std::isfinite(v)) throw ValidationError("PSG features must be finite and >= 0");
  }
  if (n1 + n2 + n3 + rem > 100.0 + kStageSumTolerance) {
    throw ValidationError("sleep stage percentages sum above 100");
  }
}

void OximetryRecording::validate() const {
  if (samples.empty()) throw ValidationError("recording " + patient_id + " has no samples");
  if (!(fs > 0) || !std::isfinite(fs)) throw ValidationError("recording " + patient_id + " has fs <= 0");
  label.validate();
  demographics.validate();
  if (psg) psg->validate();
}

std::vector<double> read_signal_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open signal file " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto v = text::parse_double(line);
    if (!v || !std::isfinite(*v)) {
      throw Error("non-numeric sample at line " + std::to_string(lineno) + " of " + path.string());
    }
    out.push_back(*v);
  }
  return out;
}

void write_signal_file(const std::filesystem::path& path, const std::vector<double>& samples) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write signal file " + path.string());
  for (double v : samples) out << text::format_double(v) << '\n';
}

namespace {

constexpr std::size_t kColumns = 19;

double required_number(const std::vector<std::string>& cells, std::size_t i, const char* name) {
  const auto v = text::parse_double(cells[i]);
  if (!v || !std::isfinite(*v)) throw ValidationError(std::string("bad or missing ") + name);
  return *v;
}

Gender parse_gender(const std::string& cell) {
  std::string s;
  for (char c : cell) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "m" || s == "male" || s == "0") return Gender::male;
  if (s == "f" || s == "female" || s == "1") return Gender::female;
  throw ValidationError("bad gender '" + cell + "'");
}

bool parse_bool(const std::string& cell) {
  if (cell == "1" || cell == "true") return true;
  if (cell == "0" || cell == "false") return false;
  throw ValidationError("bad is_copd '" + cell + "'");
}

OximetryRecording parse_row(const std::vector<std::string>& cells, const std::filesystem::path& base) {
  if (cells.size() != kColumns) {
    throw ValidationError("expected " + std::to_string(kColumns) + " columns, got " + std::to_string(cells.size()));
  }
  OximetryRecording rec;
  rec.patient_id = cells[0];
  if (rec.patient_id.empty()) throw ValidationError("empty patient_id");
  std::filesystem::path signal = cells[1];
  if (signal.empty()) throw ValidationError("empty signal_path");
  if (signal.is_relative()) signal = base / signal;
  rec.fs = cells[2].empty() ? 1.0 : required_number(cells, 2, "fs");
  rec.label.is_copd = parse_bool(cells[3]);
  if (!cells[4].empty()) {
    const auto g = text::parse_int(cells[4]);
    if (!g) throw ValidationError("bad gold '" + cells[4] + "'");
    rec.label.gold = static_cast<int>(*g);
  }
  rec.demographics.gender = parse_gender(cells[5]);
  rec.demographics.age = required_number(cells, 6, "age");
  rec.demographics.weight = required_number(cells, 7, "weight");
  rec.demographics.height = required_number(cells, 8, "height");
  const auto smoking = text::parse_int(cells[9]);
  if (!smoking || *smoking < 0 || *smoking > 2) throw ValidationError("bad smoking '" + cells[9] + "'");
  rec.demographics.smoking = static_cast<Smoking>(*smoking);

  std::size_t present = 0;
  for (std::size_t i = 10; i < kColumns; ++i) present += cells[i].empty() ? 0 : 1;
  if (present == kColumns - 10) {
    PsgFeatures p;
    double* fields[] = {&p.ahi, &p.ai, &p.hi, &p.n1, &p.n2, &p.n3, &p.rem, &p.arousal, &p.se};
    static const char* names[] = {"ahi", "ai", "hi", "n1", "n2", "n3", "rem", "arousal", "se"};
    for (std::size_t i = 0; i < 9; ++i) *fields[i] = required_number(cells, 10 + i, names[i]);
    rec.psg = p;
  } else if (present != 0) {
    throw ValidationError("PSG columns must be all present or all empty");
  }

  if (!std::filesystem::exists(signal)) throw ValidationError("missing signal file " + signal.string());
  try {
    rec.samples = read_signal_file(signal);
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }
  rec.validate();
  return rec;
}

} // namespace

std::vector<OximetryRecording> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("manifest " + path.string() + " is empty");
  if (text::split(line) != text::split(kManifestHeader)) {
    throw ValidationError("manifest header mismatch, expected: " + std::string(kManifestHeader));
  }
  const auto base = path.parent_path();
  std::vector<OximetryRecording> out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    ++row;
    try {
      out.push_back(parse_row(text::split(line), base));
    } catch (const Error& e) {
      throw ValidationError("manifest row " + std::to_string(row) + ": " + e.what());
    }
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<OximetryRecording>& recordings,
                    const std::vector<std::string>& signal_paths) {
  if (signal_paths.size() != recordings.size()) throw Error("write_manifest: path count mismatch");
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  out << kManifestHeader << '\n';
  using text::format_double;
  for (std::size_t i = 0; i < recordings.size(); ++i) {
    const auto& r = recordings[i];
    out << r.patient_id << ',' << signal_paths[i] << ',' << format_double(r.fs) << ','
        << (r.label.is_copd ? 1 : 0) << ',' << (r.label.gold ? std::to_string(*r.label.gold) : "") << ','
        << (r.demographics.gender == Gender::male ? "M" : "F") << ',' << format_double(r.demographics.age) << ','
        << format_double(r.demographics.weight) << ',' << format_double(r.demographics.height) << ','
        << static_cast<int>(r.demographics.smoking);
    if (r.psg) {
      const auto& p = *r.psg;
      for (double v : {p.ahi, p.ai, p.hi, p.n1, p.n2, p.n3, p.rem, p.arousal, p.se}) out << ',' << format_double(v);
    } else {
      out << ",,,,,,,,,";
    }
    out << '\n';
  }
}

} // namespace oxicopd
