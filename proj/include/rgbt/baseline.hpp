#pragma once

#include <map>
#include <vector>

#include "rgbt/dataset.hpp"
#include "rgbt/imaging.hpp"

namespace rgbt {

// Scalar temperature features per plant-day. PlantMean is the mean inside
// the eroded plant mask; PlantMinusContour subtracts the mean of the rim the
// erosion removed, which sits on background-adjacent pixels.
enum class FeatureKind { PlantMean, PlantMinusContour };

const char* feature_kind_name(FeatureKind k);

// Plant-interior and rim means for one thermal frame.
struct ThermalStats {
  double plant_mean = 0.0;
  double band_mean = 0.0;
};

ThermalStats thermal_stats(const TemperatureGrid& grid, const Mask& contour,
                           int erosion_radius);

double feature_from_stats(const ThermalStats& stats, FeatureKind kind);

// Loads and decodes one thermal record, rasterizes its contour and returns
// both means. Rejects 8-bit rasters and records without contours.
ThermalStats record_thermal_stats(const DatasetIndex& index,
                                  const PlantId& plant, int day,
                                  int erosion_radius);

double ambient_correct(double feature, double ambient);

// Mean feature per (treatment, day) over the training plants.
struct CentroidTable {
  FeatureKind kind = FeatureKind::PlantMean;
  int erosion_radius = kDefaultErosionRadius;
  std::map<std::pair<Treatment, int>, double> means;

  double at(Treatment t, int day) const;
};

// `ambient` (optional, indexed by day-1) switches the table to
// ambient-corrected features; predictions must then be corrected the same
// way. Every (treatment, day) cell must receive at least one feature.
CentroidTable fit_centroids(const DatasetIndex& train, FeatureKind kind,
                            int erosion_radius,
                            const std::vector<double>* ambient = nullptr);

// Nearest centroid among that day's four. Distance ties resolve toward the
// less stressed treatment.
Treatment predict_nearest(const CentroidTable& table, int day, double feature);

// Majority vote of per-day predictions over the last `window` entries, which
// must cover consecutive days. Vote ties resolve toward A.
Treatment predict_sequence(const CentroidTable& table,
                           const std::vector<std::pair<int, double>>& day_features,
                           int window = 3);

// Accuracy ladder on a held-out test split: per-image prediction with each
// feature kind, then the multi-day vote.
struct BaselineLadder {
  double single_plant_mean = 0.0;
  double single_plant_minus_contour = 0.0;
  double vote_plant_mean = 0.0;
  int64_t single_windows = 0;
  int64_t vote_windows = 0;
};

struct BaselineOptions {
  int erosion_radius = kDefaultErosionRadius;
  int vote_window = 3;
  bool exclude_final_day = false;  // drop the last experiment day (plants
                                   // returned to normal irrigation)
  const std::vector<double>* ambient = nullptr;
};

BaselineLadder evaluate_baseline(const DatasetIndex& train,
                                 const DatasetIndex& test,
                                 const BaselineOptions& options);

}  // namespace rgbt
