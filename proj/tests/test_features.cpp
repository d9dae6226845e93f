#include <filesystem>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "oxicopd/error.hpp"
#include "oxicopd/features.hpp"

using namespace oxicopd;
namespace fs = std::filesystem;

namespace {

OximetryRecording night(const std::string& id, double hours, bool copd, std::uint64_t seed) {
  OximetryRecording r;
  r.patient_id = id;
  r.fs = 1.0;
  r.label = {copd, copd ? std::optional<int>(2) : std::nullopt};
  r.demographics = {Gender::male, 61, 82, 174, Smoking::ex_smoker};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 0.4);
  const auto n = static_cast<std::size_t>(hours * 3600);
  double level = 95;
  for (std::size_t i = 0; i < n; ++i) {
    level += g(rng) + 0.02 * (95 - level);
    double v = level;
    if (i % 400 < 25) v -= 4.0 * (1 - std::abs(static_cast<double>(i % 400) - 12.0) / 12.0);
    r.samples.push_back(std::round(std::clamp(v, 70.0, 100.0)));
  }
  return r;
}

} // namespace

TEST_CASE("feature counts per model") {
  CHECK(feature_count(ModelKind::model1) == 5);
  CHECK(feature_count(ModelKind::model2) == 118);
  CHECK(feature_count(ModelKind::model3) == 123);
  CHECK(feature_count(ModelKind::model4) == 132);
  for (auto k : {ModelKind::model1, ModelKind::model2, ModelKind::model3, ModelKind::model4}) {
    const auto names = feature_names(k);
    CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
    CHECK(parse_model_kind(to_string(k)) == k);
  }
  const auto names = feature_names(ModelKind::model4);
  CHECK(std::find(names.begin(), names.end(), "bmi") == names.end());
  CHECK(std::find(names.begin(), names.end(), "ODI_rel_overall") != names.end());
  CHECK_THROWS_AS(parse_model_kind("model5"), Error);
}

TEST_CASE("window tiling") {
  SUBCASE("COPD training recording is augmented") {
    const auto w = make_windows(night("c", 7, true, 1), true);
    REQUIRE(w.size() == 6);
    for (std::size_t i = 0; i < w.size(); ++i) {
      CHECK(w[i].start_s == 3600.0 * static_cast<double>(i));
      CHECK(w[i].end_s - w[i].start_s == 7200);
      CHECK(w[i].samples.size() == 7200);
    }
  }
  SUBCASE("non-COPD training recording") {
    const auto w = make_windows(night("n", 7, false, 1), true);
    REQUIRE(w.size() == 3);
    CHECK(w[2].start_s == 14400);
  }
  SUBCASE("evaluation never overlaps") {
    CHECK(make_windows(night("c", 7, true, 1), false).size() == 3);
  }
  SUBCASE("exactly two hours") {
    CHECK(make_windows(night("c", 2, true, 1), true).size() == 1);
    CHECK(make_windows(night("n", 2, false, 1), false).size() == 1);
  }
  SUBCASE("too short names the patient") {
    CHECK_THROWS_WITH_AS(make_windows(night("short-one", 1.5, true, 1), true), doctest::Contains("short-one"), Error);
  }
  SUBCASE("slices are taken from the recording") {
    const auto rec = night("n", 5, false, 3);
    const auto w = make_windows(rec, true);
    REQUIRE(w.size() == 2);
    CHECK(std::equal(w[1].samples.begin(), w[1].samples.end(), rec.samples.begin() + 7200));
  }
}

TEST_CASE("majority vote") {
  CHECK(majority_vote(std::vector<int>{1, 1, 0}) == 1);
  CHECK(majority_vote(std::vector<int>{0, 0, 0, 1}) == 0);
  CHECK(majority_vote(std::vector<int>{1, 0}) == 1);
  CHECK_THROWS(majority_vote(std::vector<int>{}));
  std::mt19937_64 rng(6);
  for (int t = 0; t < 200; ++t) {
    std::vector<int> v(1 + rng() % 9);
    for (auto& x : v) x = static_cast<int>(rng() % 2);
    const auto ones = std::count(v.begin(), v.end(), 1);
    CHECK(majority_vote(v) == (2 * ones >= static_cast<long>(v.size()) ? 1 : 0));
  }
}

TEST_CASE("extraction") {
  std::vector<OximetryRecording> recs{night("A", 4.5, true, 11), night("B", 4.2, false, 12)};
  recs[1].psg = PsgFeatures{12, 4, 8, 10, 55, 15, 20, 18, 82};
  const auto m2 = extract_features(recs, ModelKind::model2, true, {}, {}, {});
  REQUIRE(m2.rows.size() == 3 + 2);
  CHECK(m2.columns.size() == 118);
  CHECK_NOTHROW(m2.validate());
  CHECK(m2.rows[0].label == 1);
  CHECK(m2.rows[3].label == 0);

  const auto odi = m2.column_index("ODI_rel");
  const auto odi_all = m2.column_index("ODI_rel_overall");
  CHECK(m2.rows[0].values[odi_all] == m2.rows[1].values[odi_all]);
  CHECK(m2.rows[0].values[odi] > 0);

  const auto m3 = extract_features(recs, ModelKind::model3, false, {}, {}, {});
  REQUIRE(m3.rows.size() == 2 + 2);
  CHECK(m3.columns.size() == 123);
  CHECK(m3.rows[0].values[m3.column_index("age")] == 61);
  // evaluation rows reuse the same per-window values as training rows at equal starts
  CHECK(m3.rows[1].values[m3.column_index("AV")] == m2.rows[2].values[m2.column_index("AV")]);

  CHECK_THROWS_WITH_AS(extract_features(recs, ModelKind::model4, true, {}, {}, {}), doctest::Contains("A"), Error);

  SUBCASE("deterministic and independent of the job count") {
    const auto again = extract_features(recs, ModelKind::model2, true, {}, {}, {}, 4);
    REQUIRE(again.rows.size() == m2.rows.size());
    for (std::size_t i = 0; i < again.rows.size(); ++i) CHECK(again.rows[i].values == m2.rows[i].values);
  }
  SUBCASE("table round trip is bit exact") {
    const auto dir = fs::temp_directory_path() / "oxicopd_test_features";
    fs::create_directories(dir);
    write_feature_table(dir / "m2.csv", m2);
    const auto back = read_feature_table(dir / "m2.csv");
    CHECK(back.columns == m2.columns);
    REQUIRE(back.rows.size() == m2.rows.size());
    for (std::size_t i = 0; i < back.rows.size(); ++i) {
      CHECK(back.rows[i].patient_id == m2.rows[i].patient_id);
      CHECK(back.rows[i].window_index == m2.rows[i].window_index);
      CHECK(back.rows[i].label == m2.rows[i].label);
      CHECK(back.rows[i].values == m2.rows[i].values);
    }
  }
}

TEST_CASE("awkward doubles survive the table format") {
  FeatureMatrix m;
  m.columns = {"x", "y"};
  std::mt19937_64 rng(99);
  for (int i = 0; i < 200; ++i) {
    const double a = std::ldexp(static_cast<double>(rng() >> 11), static_cast<int>(rng() % 200) - 150);
    const double b = -1.0 / (1.0 + static_cast<double>(i)) * 1e-300;
    m.rows.push_back({"p" + std::to_string(i % 7), static_cast<std::size_t>(i), i % 2, {a, b}});
  }
  const auto path = fs::temp_directory_path() / "oxicopd_test_awkward.csv";
  write_feature_table(path, m);
  const auto back = read_feature_table(path);
  for (std::size_t i = 0; i < m.rows.size(); ++i) CHECK(back.rows[i].values == m.rows[i].values);
}

TEST_CASE("validation rejects non-finite values and duplicate columns") {
  FeatureMatrix m;
  m.columns = {"x", "x"};
  m.rows.push_back({"p", 0, 0, {1, 2}});
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m.columns = {"x", "y"};
  m.rows[0].values[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(m.validate(), ValidationError);
}

TEST_CASE("biomarker vector of a realistic window is finite") {
  const auto rec = night("A", 2, true, 5);
  const auto b = compute_biomarkers(rec.samples, 1.0);
  for (double v : b.values) CHECK(std::isfinite(v));
  CHECK(b["ODI_rel"] > 0);
  CHECK(b["LZ"] > 1);
  CHECK(b["CTx"] >= 0);
}
