#include "oxicopd/model_store.hpp"

#include <fstream>

#include <json.hpp>

#include "oxicopd/error.hpp"

namespace oxicopd {

using nlohmann::json;

std::string to_string(ClassifierKind kind) { return kind == ClassifierKind::lr ? "lr" : "rf"; }

ClassifierKind parse_classifier_kind(std::string_view s) {
  if (s == "lr") return ClassifierKind::lr;
  if (s == "rf") return ClassifierKind::rf;
  throw Error("unknown classifier '" + std::string(s) + "' (expected lr or rf)");
}

double TrainedModel::probability(std::span<const double> row) const {
  const auto z = standardizer.apply(row);
  return classifier == ClassifierKind::lr ? lr.probability(z) : rf.probability(z);
}

std::vector<double> TrainedModel::score(const FeatureMatrix& table) const {
  FeatureMatrix view;
  if (table.columns == features) {
    view = table;
  } else if (table.columns == feature_names(model_kind)) {
    view = table.select(features);
  } else {
    throw ValidationError("feature table columns do not match the stored model (" + to_string(model_kind) + ", " +
                          std::to_string(features.size()) + " selected features)");
  }
  std::vector<double> out;
  out.reserve(view.rows.size());
  for (const auto& r : view.rows) out.push_back(probability(r.values));
  return out;
}

namespace {

json tree_to_json(const Tree& t) {
  return {{"feature", t.feature}, {"threshold", t.threshold}, {"left", t.left}, {"right", t.right}, {"value", t.value}};
}

Tree tree_from_json(const json& j) {
  Tree t;
  j.at("feature").get_to(t.feature);
  j.at("threshold").get_to(t.threshold);
  j.at("left").get_to(t.left);
  j.at("right").get_to(t.right);
  j.at("value").get_to(t.value);
  const auto n = t.value.size();
  if (t.feature.size() != n || t.threshold.size() != n || t.left.size() != n || t.right.size() != n || n == 0) {
    throw ValidationError("malformed tree in model file");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (t.feature[i] < 0) continue;
    if (t.left[i] <= static_cast<int>(i) || t.right[i] <= static_cast<int>(i) || t.left[i] >= static_cast<int>(n) ||
        t.right[i] >= static_cast<int>(n)) {
      throw ValidationError("malformed tree in model file");
    }
  }
  return t;
}

} // namespace

void save_model(const std::filesystem::path& path, const TrainedModel& m) {
  json j;
  j["format"] = "oxicopd-model";
  j["version"] = kModelFormatVersion;
  j["model_kind"] = to_string(m.model_kind);
  j["classifier"] = to_string(m.classifier);
  j["features"] = m.features;
  j["standardizer"] = {{"mean", m.standardizer.mean}, {"sd", m.standardizer.sd}};
  if (m.classifier == ClassifierKind::lr) {
    j["hyper"] = {{"learning_rate", m.lr_hyper.learning_rate},
                  {"l2", m.lr_hyper.l2},
                  {"max_epochs", m.lr_hyper.max_epochs},
                  {"tolerance", m.lr_hyper.tolerance}};
    j["weights"] = m.lr.weights;
    j["bias"] = m.lr.bias;
  } else {
    j["hyper"] = {{"n_estimators", m.rf_hyper.n_estimators},
                  {"max_features", m.rf_hyper.max_features == MaxFeatures::all ? "all" : "sqrt"},
                  {"max_depth", m.rf_hyper.max_depth},
                  {"min_samples_split", m.rf_hyper.min_samples_split},
                  {"min_samples_leaf", m.rf_hyper.min_samples_leaf},
                  {"bootstrap", m.rf_hyper.bootstrap}};
    json trees = json::array();
    for (const auto& t : m.rf.trees) trees.push_back(tree_to_json(t));
    j["trees"] = std::move(trees);
    j["importance"] = m.rf.importance;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file " + path.string());
  out << j.dump(1) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read model file " + path.string());
  try {
    const json j = json::parse(in);
    if (j.at("format") != "oxicopd-model") throw ValidationError("not a model file: " + path.string());
    if (j.at("version") != kModelFormatVersion) {
      throw ValidationError("unsupported model file version " + j.at("version").dump());
    }
    TrainedModel m;
    m.model_kind = parse_model_kind(j.at("model_kind").get<std::string>());
    m.classifier = parse_classifier_kind(j.at("classifier").get<std::string>());
    j.at("features").get_to(m.features);
    j.at("standardizer").at("mean").get_to(m.standardizer.mean);
    j.at("standardizer").at("sd").get_to(m.standardizer.sd);
    const std::size_t p = m.features.size();
    if (m.standardizer.mean.size() != p || m.standardizer.sd.size() != p) {
      throw ValidationError("standardizer width does not match the feature list");
    }
    const auto& h = j.at("hyper");
    if (m.classifier == ClassifierKind::lr) {
      h.at("learning_rate").get_to(m.lr_hyper.learning_rate);
      h.at("l2").get_to(m.lr_hyper.l2);
      h.at("max_epochs").get_to(m.lr_hyper.max_epochs);
      h.at("tolerance").get_to(m.lr_hyper.tolerance);
      j.at("weights").get_to(m.lr.weights);
      j.at("bias").get_to(m.lr.bias);
      if (m.lr.weights.size() != p) throw ValidationError("weight count does not match the feature list");
    } else {
      h.at("n_estimators").get_to(m.rf_hyper.n_estimators);
      m.rf_hyper.max_features = h.at("max_features") == "all" ? MaxFeatures::all : MaxFeatures::sqrt;
      h.at("max_depth").get_to(m.rf_hyper.max_depth);
      h.at("min_samples_split").get_to(m.rf_hyper.min_samples_split);
      h.at("min_samples_leaf").get_to(m.rf_hyper.min_samples_leaf);
      h.at("bootstrap").get_to(m.rf_hyper.bootstrap);
      for (const auto& t : j.at("trees")) {
        m.rf.trees.push_back(tree_from_json(t));
        for (int f : m.rf.trees.back().feature) {
          if (f >= static_cast<int>(p)) throw ValidationError("tree splits on a feature outside the feature list");
        }
      }
      j.at("importance").get_to(m.rf.importance);
      m.rf.n_features = p;
    }
    return m;
  } catch (const json::exception& e) {
    throw ValidationError("malformed model file " + path.string() + ": " + e.what());
  }
}

} // namespace oxicopd
