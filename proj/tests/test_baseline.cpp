#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "rgbt/baseline.hpp"
#include "rgbt/common.hpp"
#include "rgbt/dataset.hpp"
#include "rgbt/image_io.hpp"
#include "rgbt/simulator.hpp"

namespace fs = std::filesystem;
using namespace rgbt;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("rgbt_baseline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// One thermal frame plus an 8x8 square contour whose 2-eroded interior
// [4,8)^2 reads `raw`; everything else (including the contour rim) reads
// `rim_raw`, or `raw` itself when rim_raw is 0.
void write_constant_record(const fs::path& root, const PlantId& plant, int day,
                           uint16_t raw, uint16_t rim_raw = 0) {
  fs::path dir = plant_directory(root, plant);
  fs::create_directories(dir);
  ImageU16 img = ImageU16::zeros(12, 12);
  for (auto& p : img.pixels) p = rim_raw == 0 ? raw : rim_raw;
  for (int y = 4; y < 8; ++y)
    for (int x = 4; x < 8; ++x) img.at(x, y) = raw;
  write_pgm16(dir / image_file_name(day, Modality::Thermal), img);
  save_contour(dir / contour_file_name(day, Modality::Thermal),
               ContourAnnotation{{{2, 2}, {10, 2}, {10, 10}, {2, 10}}});
}

// Separable toy dataset: treatment t reads 30 + 5t Celsius, plant p adds
// 0.1p, identically on every day.
DatasetIndex toy_index(const fs::path& root, int plants, int days,
                       uint16_t rim_raw = 0) {
  for (Treatment t : kAllTreatments)
    for (int p = 1; p <= plants; ++p)
      for (int day = 1; day <= days; ++day) {
        uint16_t raw = static_cast<uint16_t>(3000 + 500 * static_cast<int>(t) +
                                             10 * p);
        write_constant_record(root, {t, p}, day, raw, rim_raw);
      }
  return load_dataset_index(root, DatasetConfig{plants, days, {plants}});
}

double stddev(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / xs.size());
}

}  // namespace

TEST_CASE("thermal stats split interior and rim means") {
  TemperatureGrid grid = TemperatureGrid::zeros(12, 12);
  for (auto& v : grid.celsius) v = 35.0;
  // the 2-eroded interior of the 8x8 square [2,10) is [4,8)
  for (int y = 4; y < 8; ++y)
    for (int x = 4; x < 8; ++x) grid.at(x, y) = 30.0;
  Mask contour = rasterize_contour(
      ContourAnnotation{{{2, 2}, {10, 2}, {10, 10}, {2, 10}}}, 12, 12);
  ThermalStats stats = thermal_stats(grid, contour, 2);
  CHECK(stats.plant_mean == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(stats.band_mean == doctest::Approx(35.0).epsilon(1e-12));
  CHECK(feature_from_stats(stats, FeatureKind::PlantMean) ==
        doctest::Approx(30.0));
  CHECK(feature_from_stats(stats, FeatureKind::PlantMinusContour) ==
        doctest::Approx(-5.0));
  CHECK(ambient_correct(30.0, 36.5) == doctest::Approx(-6.5));
}

TEST_CASE("nearest centroid picks the closest class, ties to less stress") {
  CentroidTable table;
  table.kind = FeatureKind::PlantMean;
  table.means[{Treatment::A, 1}] = 31.9;
  table.means[{Treatment::B, 1}] = 33.57;
  table.means[{Treatment::C, 1}] = 35.23;
  table.means[{Treatment::D, 1}] = 36.9;
  CHECK(predict_nearest(table, 1, 36.9) == Treatment::D);
  CHECK(predict_nearest(table, 1, 31.0) == Treatment::A);
  CHECK(predict_nearest(table, 1, 33.8) == Treatment::B);

  CentroidTable even;
  even.means[{Treatment::A, 1}] = 30.0;
  even.means[{Treatment::B, 1}] = 32.0;
  even.means[{Treatment::C, 1}] = 34.0;
  even.means[{Treatment::D, 1}] = 36.0;
  CHECK(predict_nearest(even, 1, 31.0) == Treatment::A);  // A/B midpoint
  CHECK(predict_nearest(even, 1, 35.0) == Treatment::C);  // C/D midpoint
  CHECK_THROWS_AS(predict_nearest(even, 2, 31.0), std::runtime_error);
}

TEST_CASE("sequence vote takes the majority of the last window days") {
  CentroidTable table;
  for (int day = 1; day <= 4; ++day) {
    table.means[{Treatment::A, day}] = 0.0;
    table.means[{Treatment::B, day}] = 10.0;
    table.means[{Treatment::C, day}] = 20.0;
    table.means[{Treatment::D, day}] = 30.0;
  }
  using DayFeature = std::pair<int, double>;
  std::vector<DayFeature> features = {{1, 1.0}, {2, 9.0}, {3, 2.0}};
  CHECK(predict_sequence(table, features, 3) == Treatment::A);

  // a late run of B outvotes the early A days within the window
  std::vector<DayFeature> drift = {{1, 0.0}, {2, 9.0}, {3, 11.0}, {4, 9.5}};
  CHECK(predict_sequence(table, drift, 3) == Treatment::B);
  // vote tie resolves toward the less stressed class
  std::vector<DayFeature> tie = {{1, 1.0}, {2, 9.0}, {3, 21.0}, {4, 1.0}};
  CHECK(predict_sequence(table, tie, 4) == Treatment::A);

  CHECK_THROWS_AS(predict_sequence(table, features, 0), std::invalid_argument);
  CHECK_THROWS_AS(predict_sequence(table, features, 4), std::invalid_argument);
  std::vector<DayFeature> gap = {{1, 1.0}, {3, 2.0}, {4, 1.0}};
  CHECK_THROWS_AS(predict_sequence(table, gap, 3), std::invalid_argument);
}

TEST_CASE("centroids are exact treatment-day means of training features") {
  fs::path root = fresh_dir("toy");
  DatasetIndex index = toy_index(root, 3, 2);
  DatasetSplit split = split_train_test(index, {3});

  CentroidTable table =
      fit_centroids(split.train, FeatureKind::PlantMean, 2);
  for (Treatment t : kAllTreatments)
    for (int day = 1; day <= 2; ++day) {
      double expect = 30.0 + 5.0 * static_cast<int>(t) + 0.15;
      CHECK(table.at(t, day) == doctest::Approx(expect).epsilon(1e-12));
    }

  // the difference feature cancels the shared frame value exactly
  CentroidTable diff =
      fit_centroids(split.train, FeatureKind::PlantMinusContour, 2);
  for (Treatment t : kAllTreatments)
    CHECK(diff.at(t, 1) == doctest::Approx(0.0).epsilon(1e-12));

  // a missing (treatment, day) cell is an error, not a silent hole
  fs::remove(plant_directory(root, {Treatment::B, 1}) /
             image_file_name(2, Modality::Thermal));
  fs::remove(plant_directory(root, {Treatment::B, 2}) /
             image_file_name(2, Modality::Thermal));
  DatasetIndex broken =
      load_dataset_index(root, DatasetConfig{3, 2, {3}});
  DatasetSplit bsplit = split_train_test(broken, {3});
  CHECK_THROWS_AS(fit_centroids(bsplit.train, FeatureKind::PlantMean, 2),
                  std::runtime_error);
}

TEST_CASE("record stats reject missing contours and 8-bit rasters") {
  fs::path root = fresh_dir("reject");
  PlantId plant{Treatment::A, 1};
  fs::path dir = plant_directory(root, plant);
  fs::create_directories(dir);
  ImageU16 img = ImageU16::zeros(12, 12);
  for (auto& p : img.pixels) p = 3000;
  write_pgm16(dir / image_file_name(1, Modality::Thermal), img);

  DatasetIndex index = load_dataset_index(root, DatasetConfig{1, 1, {}});
  CHECK_THROWS_AS(record_thermal_stats(index, plant, 1, 2),
                  std::runtime_error);  // no contour sidecar

  Mask mask = Mask::zeros(12, 12);
  for (int y = 2; y < 10; ++y)
    for (int x = 2; x < 10; ++x) mask.set(x, y, true);
  write_mask_pgm(dir / image_file_name(1, Modality::Thermal), mask);  // maxval 1
  save_contour(dir / contour_file_name(1, Modality::Thermal),
               ContourAnnotation{{{2, 2}, {10, 2}, {10, 10}, {2, 10}}});
  DatasetIndex again = load_dataset_index(root, DatasetConfig{1, 1, {}});
  CHECK_THROWS_AS(record_thermal_stats(again, plant, 1, 2),
                  std::runtime_error);  // not a 16-bit raster
}

TEST_CASE("separable data scores a perfect ladder") {
  fs::path root = fresh_dir("perfect");
  // cool 25.0 C rim keeps the difference feature separable too
  DatasetIndex index = toy_index(root, 3, 4, 2500);
  DatasetSplit split = split_train_test(index, {3});

  BaselineOptions opts;
  BaselineLadder ladder = evaluate_baseline(split.train, split.test, opts);
  CHECK(ladder.single_plant_mean == 1.0);
  CHECK(ladder.single_plant_minus_contour == 1.0);
  CHECK(ladder.vote_plant_mean == 1.0);
  CHECK(ladder.single_windows == 4 * 4);  // 4 test plants, 4 days
  CHECK(ladder.vote_windows == 4 * 2);    // windows ending on days 3 and 4

  opts.exclude_final_day = true;
  BaselineLadder shorter = evaluate_baseline(split.train, split.test, opts);
  CHECK(shorter.single_windows == 4 * 3);
  CHECK(shorter.vote_windows == 4 * 1);

  DatasetIndex empty_test;
  empty_test.config = index.config;
  CHECK_THROWS_AS(evaluate_baseline(split.train, empty_test, BaselineOptions{}),
                  std::runtime_error);  // nothing to score
}

TEST_CASE("zero-noise simulation is classified perfectly") {
  fs::path root = fresh_dir("sim0");
  SimulatorConfig sim;
  sim.plants_per_treatment = 3;
  sim.days = 6;
  sim.canvas_width = 96;
  sim.canvas_height = 72;
  sim.sensor_noise_sigma_c = 0.0;
  sim.leaf_temp_sigma_c = 0.0;
  sim.emit_rgb = false;
  sim.seed = 21;
  simulate_to_directory(sim, root);

  DatasetConfig cfg = dataset_config(sim);
  cfg.test_indices = {3};
  DatasetIndex index = load_dataset_index(root, cfg);
  DatasetSplit split = split_train_test(index, cfg.test_indices);
  BaselineLadder ladder =
      evaluate_baseline(split.train, split.test, BaselineOptions{});
  CHECK(ladder.single_plant_mean == 1.0);
  CHECK(ladder.single_plant_minus_contour == 1.0);
  CHECK(ladder.vote_plant_mean == 1.0);
}

TEST_CASE("ambient correction collapses cross-day feature spread") {
  fs::path root = fresh_dir("ambient");
  SimulatorConfig sim;
  sim.plants_per_treatment = 2;
  sim.days = 8;
  sim.canvas_width = 96;
  sim.canvas_height = 72;
  sim.sensor_noise_sigma_c = 0.0;
  sim.leaf_temp_sigma_c = 0.0;
  sim.emit_rgb = false;
  sim.seed = 9;
  simulate_to_directory(sim, root);

  std::vector<double> ambient = ambient_series(sim);
  DatasetConfig cfg = dataset_config(sim);
  DatasetIndex index = load_dataset_index(root, cfg);

  for (const PlantId& plant : index.plants()) {
    std::vector<double> raw, corrected;
    for (int day = 1; day <= sim.days; ++day) {
      ThermalStats stats = record_thermal_stats(index, plant, day, 2);
      double f = feature_from_stats(stats, FeatureKind::PlantMean);
      raw.push_back(f);
      corrected.push_back(ambient_correct(f, ambient[day - 1]));
    }
    // with zero noise the corrected feature is a constant of the treatment
    CHECK(stddev(corrected) < 1e-9);
    CHECK(stddev(raw) > 0.1);  // ambient drift dominates the uncorrected one
  }

  // correcting both features and centroids shifts them equally per day, so
  // accuracies cannot change
  cfg.test_indices = {2};
  DatasetSplit split = split_train_test(index, cfg.test_indices);
  BaselineOptions opts;
  BaselineLadder plain = evaluate_baseline(split.train, split.test, opts);
  opts.ambient = &ambient;
  BaselineLadder fixed = evaluate_baseline(split.train, split.test, opts);
  CHECK(plain.single_plant_mean == fixed.single_plant_mean);
  CHECK(plain.vote_plant_mean == fixed.vote_plant_mean);
}

TEST_CASE("three-day voting beats single-day reads under noise") {
  // Monte Carlo on the vote itself: per-day features drawn around the true
  // centroid with enough spread to misclassify often.
  CentroidTable table;
  const int days = 9;
  for (int day = 1; day <= days; ++day)
    for (Treatment t : kAllTreatments)
      table.means[{t, day}] = 10.0 * static_cast<int>(t);

  Rng rng(77);
  int64_t single_correct = 0, single_total = 0;
  int64_t vote_correct = 0, vote_total = 0;
  for (int trial = 0; trial < 400; ++trial) {
    Treatment truth = kAllTreatments[trial % 4];
    std::vector<std::pair<int, double>> features;
    for (int day = 1; day <= days; ++day) {
      double f = rng.normal(10.0 * static_cast<int>(truth), 8.0);
      features.emplace_back(day, f);
      single_total += 1;
      single_correct += predict_nearest(table, day, f) == truth;
    }
    for (int end = 3; end <= days; ++end) {
      std::vector<std::pair<int, double>> prefix(features.begin(),
                                                 features.begin() + end);
      vote_total += 1;
      vote_correct += predict_sequence(table, prefix, 3) == truth;
    }
  }
  double single = static_cast<double>(single_correct) / single_total;
  double vote = static_cast<double>(vote_correct) / vote_total;
  CHECK(single < vote);
  CHECK(single > 0.3);  // sanity: noise level leaves real signal
  CHECK(vote < 1.0);
}
