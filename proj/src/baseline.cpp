#include "rgbt/baseline.hpp"

#include <cmath>
#include <stdexcept>

#include "rgbt/image_io.hpp"

namespace rgbt {

const char* feature_kind_name(FeatureKind k) {
  return k == FeatureKind::PlantMean ? "plant_mean" : "plant_minus_contour";
}

ThermalStats thermal_stats(const TemperatureGrid& grid, const Mask& contour,
                           int erosion_radius) {
  Mask eroded = erode(contour, erosion_radius);
  Mask band = contour_band(contour, eroded);
  ThermalStats stats;
  stats.plant_mean = masked_mean(grid, eroded);
  stats.band_mean = masked_mean(grid, band);
  return stats;
}

double feature_from_stats(const ThermalStats& stats, FeatureKind kind) {
  return kind == FeatureKind::PlantMean
             ? stats.plant_mean
             : stats.plant_mean - stats.band_mean;
}

ThermalStats record_thermal_stats(const DatasetIndex& index,
                                  const PlantId& plant, int day,
                                  int erosion_radius) {
  const ImageRecord& rec = index.at(plant, day, Modality::Thermal);
  if (rec.contour_path.empty())
    throw std::runtime_error("no contour annotation for " + plant_name(plant) +
                             " day " + std::to_string(day) + " thermal");
  PgmFile pgm = read_pgm(rec.image_path);
  if (pgm.maxval <= 255)
    throw std::runtime_error(rec.image_path.string() +
                             ": expected a 16-bit thermal raster");
  TemperatureGrid grid = decode_thermal(pgm.image);
  ContourAnnotation contour = load_contour(rec.contour_path);
  Mask mask = rasterize_contour(contour, grid.width, grid.height);
  return thermal_stats(grid, mask, erosion_radius);
}

double ambient_correct(double feature, double ambient) {
  return feature - ambient;
}

double CentroidTable::at(Treatment t, int day) const {
  auto it = means.find({t, day});
  if (it == means.end())
    throw std::runtime_error(std::string("no centroid for treatment ") +
                             treatment_letter(t) + " day " +
                             std::to_string(day));
  return it->second;
}

namespace {

double corrected(double feature, int day, const std::vector<double>* ambient) {
  if (!ambient) return feature;
  if (day < 1 || day > static_cast<int>(ambient->size()))
    throw std::runtime_error("no ambient reading for day " +
                             std::to_string(day));
  return ambient_correct(feature, (*ambient)[day - 1]);
}

}  // namespace

CentroidTable fit_centroids(const DatasetIndex& train, FeatureKind kind,
                            int erosion_radius,
                            const std::vector<double>* ambient) {
  CentroidTable table;
  table.kind = kind;
  table.erosion_radius = erosion_radius;

  std::map<std::pair<Treatment, int>, std::pair<double, int64_t>> acc;
  for (const auto& [key, rec] : train.records) {
    if (key.modality != Modality::Thermal) continue;
    ThermalStats stats =
        record_thermal_stats(train, key.plant, key.day, erosion_radius);
    double f = corrected(feature_from_stats(stats, kind), key.day, ambient);
    auto& cell = acc[{key.plant.treatment, key.day}];
    cell.first += f;
    cell.second += 1;
  }

  std::string missing;
  for (Treatment t : kAllTreatments) {
    for (int day = 1; day <= train.config.days; ++day) {
      auto it = acc.find({t, day});
      if (it == acc.end()) {
        if (!missing.empty()) missing += ", ";
        missing += std::string(1, treatment_letter(t)) + "/" +
                   std::to_string(day);
      } else {
        table.means[{t, day}] = it->second.first / it->second.second;
      }
    }
  }
  if (!missing.empty())
    throw std::runtime_error("fit_centroids: no training features for " +
                             missing);
  return table;
}

Treatment predict_nearest(const CentroidTable& table, int day,
                          double feature) {
  Treatment best = Treatment::A;
  double best_dist = 0.0;
  bool first = true;
  for (Treatment t : kAllTreatments) {
    double d = std::abs(feature - table.at(t, day));
    // strict < keeps the less stressed class on exact ties
    if (first || d < best_dist) {
      best = t;
      best_dist = d;
      first = false;
    }
  }
  return best;
}

Treatment predict_sequence(const CentroidTable& table,
                           const std::vector<std::pair<int, double>>& day_features,
                           int window) {
  if (window < 1)
    throw std::invalid_argument("predict_sequence: window must be positive");
  if (static_cast<int>(day_features.size()) < window)
    throw std::invalid_argument("predict_sequence: fewer than " +
                                std::to_string(window) + " day features");
  size_t start = day_features.size() - window;
  for (size_t i = start + 1; i < day_features.size(); ++i)
    if (day_features[i].first != day_features[i - 1].first + 1)
      throw std::invalid_argument(
          "predict_sequence: days must be consecutive");

  int votes[4] = {0, 0, 0, 0};
  for (size_t i = start; i < day_features.size(); ++i) {
    Treatment p =
        predict_nearest(table, day_features[i].first, day_features[i].second);
    ++votes[static_cast<int>(p)];
  }
  int best = 0;
  for (int t = 1; t < 4; ++t)
    if (votes[t] > votes[best]) best = t;  // ties stay on the earlier class
  return static_cast<Treatment>(best);
}

BaselineLadder evaluate_baseline(const DatasetIndex& train,
                                 const DatasetIndex& test,
                                 const BaselineOptions& options) {
  if (test.records.empty())
    throw std::runtime_error("evaluate_baseline: empty test set");

  CentroidTable mean_table = fit_centroids(
      train, FeatureKind::PlantMean, options.erosion_radius, options.ambient);
  CentroidTable diff_table =
      fit_centroids(train, FeatureKind::PlantMinusContour,
                    options.erosion_radius, options.ambient);

  int last_day = test.config.days;
  BaselineLadder ladder;
  int64_t correct_mean = 0, correct_diff = 0, correct_vote = 0;

  for (const PlantId& plant : test.plants()) {
    std::vector<std::pair<int, double>> mean_feats;
    for (int day = 1; day <= last_day; ++day) {
      if (options.exclude_final_day && day == last_day) continue;
      if (!test.has(plant, day, Modality::Thermal)) continue;
      ThermalStats stats =
          record_thermal_stats(test, plant, day, options.erosion_radius);
      double f_mean = corrected(feature_from_stats(stats, FeatureKind::PlantMean),
                                day, options.ambient);
      double f_diff =
          corrected(feature_from_stats(stats, FeatureKind::PlantMinusContour),
                    day, options.ambient);
      mean_feats.emplace_back(day, f_mean);

      ++ladder.single_windows;
      if (predict_nearest(mean_table, day, f_mean) == plant.treatment)
        ++correct_mean;
      if (predict_nearest(diff_table, day, f_diff) == plant.treatment)
        ++correct_diff;

      if (static_cast<int>(mean_feats.size()) >= options.vote_window) {
        std::vector<std::pair<int, double>> tail(
            mean_feats.end() - options.vote_window, mean_feats.end());
        bool consecutive = true;
        for (size_t i = 1; i < tail.size(); ++i)
          if (tail[i].first != tail[i - 1].first + 1) consecutive = false;
        if (consecutive) {
          ++ladder.vote_windows;
          if (predict_sequence(mean_table, tail, options.vote_window) ==
              plant.treatment)
            ++correct_vote;
        }
      }
    }
  }

  if (ladder.single_windows == 0)
    throw std::runtime_error("evaluate_baseline: no evaluable test images");
  ladder.single_plant_mean =
      static_cast<double>(correct_mean) / ladder.single_windows;
  ladder.single_plant_minus_contour =
      static_cast<double>(correct_diff) / ladder.single_windows;
  ladder.vote_plant_mean =
      ladder.vote_windows
          ? static_cast<double>(correct_vote) / ladder.vote_windows
          : 0.0;
  return ladder;
}

}  // namespace rgbt
