#include "cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "oxicopd/config.hpp"
#include "oxicopd/error.hpp"
#include "oxicopd/features.hpp"
#include "oxicopd/metrics.hpp"
#include "oxicopd/model_store.hpp"
#include "oxicopd/nested_cv.hpp"
#include "oxicopd/parallel.hpp"
#include "oxicopd/recording.hpp"
#include "oxicopd/select.hpp"
#include "oxicopd/synth.hpp"
#include "oxicopd/text.hpp"

namespace oxicopd {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out;
  std::string manifest, features, model_file;
  std::optional<std::string> model_kind, classifier, mix;
  std::optional<std::size_t> n, k;
  std::string role = "evaluation";
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  return f;
}

// defaults < config file < --set < dedicated flags
RunConfig resolve(const Options& o) {
  RunConfig c;
  if (!o.config_file.empty()) apply_config_file(c, o.config_file);
  apply_overrides(c, o.overrides);
  if (o.seed) c.seed = *o.seed;
  if (o.model_kind) c.model_kind = parse_model_kind(*o.model_kind);
  if (o.classifier) c.classifier = parse_classifier_kind(*o.classifier);
  if (o.mix) c.synth.mix = parse_mix(*o.mix);
  if (o.n) c.synth.n = *o.n;
  if (o.k) c.cv.n_select = *o.k;
  return c;
}

fs::path prepare(const Options& o, const RunConfig& c, std::ostream& out) {
  const fs::path dir(o.out);
  fs::create_directories(dir);
  auto f = open_out(dir / "config.txt");
  write_config(f, c);
  out << "# effective config\n";
  write_config(out, c);
  return dir;
}

void cmd_synth(const Options& o, std::ostream& out) {
  const RunConfig c = resolve(o);
  const auto dir = prepare(o, c, out);
  CohortSpec spec = c.synth;
  spec.seed = c.seed;
  const auto cohort = generate_cohort(spec, o.jobs);
  write_cohort(dir, cohort);
  std::size_t copd = 0;
  for (const auto& r : cohort) copd += r.recording.label.is_copd;
  out << "wrote " << cohort.size() << " recordings (" << copd << " COPD) to " << dir.string() << '\n';
}

void cmd_extract(const Options& o, std::ostream& out) {
  const RunConfig c = resolve(o);
  const auto recs = load_manifest(o.manifest);
  if (recs.empty()) throw Error("manifest " + o.manifest + " has no recordings");
  if (o.role != "evaluation" && o.role != "training") throw Error("--role must be evaluation or training");
  const bool training = o.role == "training";
  const auto dir = prepare(o, c, out);
  const auto table =
      extract_features(recs, c.model_kind, training, c.preprocess, c.biomarkers, c.windows, o.jobs);
  write_feature_table(dir / "features.csv", table);
  write_metadata(dir / "features.meta", {{"model_kind", to_string(c.model_kind)},
                                        {"role", o.role},
                                        {"manifest", o.manifest},
                                        {"patients", std::to_string(recs.size())},
                                        {"rows", std::to_string(table.rows.size())},
                                        {"columns", std::to_string(table.columns.size())},
                                        {"window_length_s", text::format_double(c.windows.length_s)},
                                        {"copd_train_hop_s", text::format_double(c.windows.copd_train_hop_s)},
                                        {"seed", std::to_string(c.seed)}});
  out << "wrote " << table.rows.size() << " rows x " << table.columns.size() << " features to "
      << (dir / "features.csv").string() << '\n';
}

void cmd_screen(const Options& o, std::ostream& out) {
  const RunConfig c = resolve(o);
  const auto table = read_feature_table(o.features);
  const auto dir = prepare(o, c, out);
  const auto report = screen_features(table);
  auto f = open_out(dir / "screening.csv");
  write_screening(f, report);
  std::size_t significant = 0;
  for (const auto& e : report.entries) significant += e.p_value < 0.01;
  out << significant << " of " << report.entries.size() << " features with p < 0.01\n";
}

void cmd_select(const Options& o, std::ostream& out) {
  const RunConfig c = resolve(o);
  const auto table = read_feature_table(o.features);
  std::size_t k = c.cv.n_select ? *c.cv.n_select : default_selection_size(table.model_kind.value_or(c.model_kind));
  if (k == 0) throw Error("nothing to select: k is 0 (set --k or select.k)");
  k = std::min(k, table.columns.size());
  const auto dir = prepare(o, c, out);
  const auto result = mrmr_select(table, k, c.cv.mi_bins, o.jobs);
  auto f = open_out(dir / "mrmr.csv");
  write_mrmr(f, result);
  out << "selected " << result.selected.size() << " features\n";
}

void write_importance(std::ostream& f, const NestedCvReport& report) {
  f << "fold,feature,importance\n";
  for (const auto& fold : report.folds) {
    const auto& m = fold.model;
    std::vector<double> imp(m.features.size());
    if (m.classifier == ClassifierKind::rf) {
      imp = m.rf.importance;
    } else {
      // magnitude of the coefficient on standardized inputs
      for (std::size_t j = 0; j < imp.size(); ++j) imp[j] = std::abs(m.lr.weights[j]);
    }
    for (std::size_t j = 0; j < m.features.size(); ++j) {
      f << fold.index + 1 << ',' << m.features[j] << ',' << text::format_double(imp[j]) << '\n';
    }
  }
}

void cmd_train_eval(const Options& o, std::ostream& out) {
  const RunConfig c = resolve(o);
  const auto recs = load_manifest(o.manifest);
  if (recs.empty()) throw Error("manifest " + o.manifest + " has no recordings");
  const auto dir = prepare(o, c, out);
  std::vector<RecordingBiomarkers> cohort(recs.size());
  parallel_for(recs.size(), o.jobs, [&](std::size_t i) {
    cohort[i] = compute_recording_biomarkers(recs[i], c.preprocess, c.biomarkers, c.windows);
  });
  const auto report = nested_cv(cohort, c.model_kind, c.classifier, c.cv_params(o.jobs));
  if (const auto v = hygiene_violations(report); !v.empty()) throw Error("leakage detected: " + v.front());

  {
    auto f = open_out(dir / "summary.csv");
    write_summary(f, report);
  }
  for (const auto& fold : report.folds) {
    const std::string tag = "fold" + std::to_string(fold.index + 1);
    {
      auto f = open_out(dir / ("roc_" + tag + ".csv"));
      write_roc(f, fold.patient_roc);
    }
    if (fold.selection) {
      auto f = open_out(dir / ("mrmr_" + tag + ".csv"));
      write_mrmr(f, *fold.selection);
    }
    {
      auto f = open_out(dir / ("search_" + tag + ".csv"));
      write_search(f, fold);
    }
    {
      auto f = open_out(dir / ("windows_" + tag + ".csv"));
      write_window_predictions(f, fold.windows);
    }
    {
      auto f = open_out(dir / ("patients_" + tag + ".csv"));
      write_patient_predictions(f, fold.patients);
    }
    save_model(dir / ("model_" + tag + ".json"), fold.model);
  }
  {
    auto f = open_out(dir / "importance.csv");
    write_importance(f, report);
  }
  for (const auto& row : summarize(report)) {
    if (row.metric == "patient_auroc" || row.metric == "window_auroc") {
      out << row.metric << " median " << text::format_double(row.median) << " iqr " << text::format_double(row.iqr)
          << '\n';
    }
  }
}

void cmd_report(const Options& o, std::ostream& out) {
  const RunConfig c = resolve(o);
  const auto model = load_model(o.model_file);
  const auto table = read_feature_table(o.features);
  const auto dir = prepare(o, c, out);
  const auto prob = model.score(table);

  std::vector<double> score;
  std::vector<int> labels, predicted;
  {
    auto f = open_out(dir / "scores.csv");
    f << "patient_id,window_index,label,probability,predicted\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& r = table.rows[i];
      f << r.patient_id << ',' << r.window_index << ',' << r.label << ',' << text::format_double(prob[i]) << ','
        << (prob[i] >= 0.5 ? 1 : 0) << '\n';
    }
  }
  // patients in order of first appearance
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::size_t>> rows_of;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    auto& v = rows_of[table.rows[i].patient_id];
    if (v.empty()) order.push_back(table.rows[i].patient_id);
    v.push_back(i);
  }
  auto f = open_out(dir / "patients.csv");
  f << "patient_id,label,score,predicted,windows\n";
  for (const auto& id : order) {
    const auto& idx = rows_of[id];
    double sum = 0;
    std::vector<int> votes;
    for (auto i : idx) {
      sum += prob[i];
      votes.push_back(prob[i] >= 0.5 ? 1 : 0);
    }
    const double s = sum / static_cast<double>(idx.size());
    const int pred = majority_vote(votes);
    const int label = table.rows[idx.front()].label;
    f << id << ',' << label << ',' << text::format_double(s) << ',' << pred << ',' << idx.size() << '\n';
    score.push_back(s);
    labels.push_back(label);
    predicted.push_back(pred);
  }
  out << "scored " << table.rows.size() << " windows of " << order.size() << " patients\n";
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives > 0 && positives < static_cast<std::ptrdiff_t>(labels.size())) {
    const auto r = rates(confusion(labels, predicted));
    auto m = open_out(dir / "metrics.csv");
    m << "level,metric,value\n";
    const std::pair<const char*, double> rows[] = {{"auroc", auroc(labels, score)}, {"se", r.se},   {"sp", r.sp},
                                                   {"ppv", r.ppv},                   {"npv", r.npv}, {"f1", r.f1},
                                                   {"kappa", r.kappa}};
    for (const auto& [name, v] : rows) m << "patient," << name << ',' << text::format_double(v) << '\n';
    out << "patient auroc " << text::format_double(rows[0].second) << '\n';
  }
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nocturnal oximetry COPD screening"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--seed", o.seed, "Random seed (overrides the config)");
  app.add_option("--jobs", o.jobs, "Worker threads, 0 = one per core; never changes results");
  app.add_option("--config", o.config_file, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", o.overrides, "Override a config key, key=value (repeatable)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort (manifest, signals, plant log)");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--n", o.n, "Cohort size");
  synth->add_option("--mix", o.mix, "Profile mix, e.g. healthy=0.5,copd_like=0.3,ovs_like=0.2");

  auto* extract = app.add_subcommand("extract", "Preprocess, window and featurize a manifest");
  extract->add_option("--manifest", o.manifest, "Manifest CSV")->required();
  extract->add_option("--out", o.out, "Output directory")->required();
  extract->add_option("--model", o.model_kind, "model1 .. model4");
  extract->add_option("--role", o.role, "evaluation (non-overlapping) or training (COPD augmentation)");

  auto* screen = app.add_subcommand("screen", "Rank-sum screening of every feature");
  screen->add_option("--features", o.features, "Feature table")->required();
  screen->add_option("--out", o.out, "Output directory")->required();

  auto* select = app.add_subcommand("select", "Greedy mRMR selection");
  select->add_option("--features", o.features, "Feature table")->required();
  select->add_option("--out", o.out, "Output directory")->required();
  select->add_option("--k", o.k, "Number of features to select");

  auto* train = app.add_subcommand("train-eval", "Nested cross-validation with stored per-fold models");
  train->add_option("--manifest", o.manifest, "Manifest CSV")->required();
  train->add_option("--out", o.out, "Output directory")->required();
  train->add_option("--model", o.model_kind, "model1 .. model4");
  train->add_option("--classifier", o.classifier, "lr or rf");

  auto* report = app.add_subcommand("report", "Score a feature table with a stored model");
  report->add_option("--model-file", o.model_file, "Stored model JSON")->required();
  report->add_option("--features", o.features, "Feature table")->required();
  report->add_option("--out", o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    if (synth->parsed()) cmd_synth(o, out);
    if (extract->parsed()) cmd_extract(o, out);
    if (screen->parsed()) cmd_screen(o, out);
    if (select->parsed()) cmd_select(o, out);
    if (train->parsed()) cmd_train_eval(o, out);
    if (report->parsed()) cmd_report(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

} // namespace oxicopd
