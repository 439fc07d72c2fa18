#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "rgbt/common.hpp"
#include "rgbt/dataset.hpp"
#include "rgbt/image.hpp"

namespace rgbt {

// Synthetic greenhouse experiment. Stress slows leaf emergence, shrinks
// leaves, and raises leaf temperature; everything else (ambient drift,
// sensor noise, per-plant phenotype) is controllable noise, so analysis
// results can be checked against known ground truth.
struct SimulatorConfig {
  int plants_per_treatment = 30;
  int days = 17;
  int canvas_width = kNativeWidth;  // one resolution for both modalities
  int canvas_height = kNativeHeight;

  // Daily greenhouse air temperature, drawn uniformly per day. Setting both
  // ends equal pins the ambient.
  double ambient_low_c = 34.0;
  double ambient_high_c = 39.0;

  // A fully watered leaf reads this far below ambient (transpiration
  // cooling); withholding water gives part of it back.
  double leaf_cooling_c = 5.0;

  // Added to the leaf base temperature, best watered first. Must be strictly
  // increasing; the default spans 5 degrees from A to D.
  std::array<double, 4> treatment_offsets_c = {0.0, 5.0 / 3.0, 10.0 / 3.0,
                                               5.0};

  double sensor_noise_sigma_c = 1.5;  // per pixel, everywhere
  double leaf_temp_sigma_c = 0.8;     // per plant and day, plant region only

  // Mean days between new leaves and relative mature leaf size, per
  // treatment, best watered first.
  std::array<double, 4> leaf_interval_days = {4.0, 14.0 / 3.0, 16.0 / 3.0,
                                              6.0};
  std::array<double, 4> leaf_growth_scale = {1.0, 0.93, 0.87, 0.80};
  int initial_leaves = 3;

  // How far the annotated polygon sits outside the hull of the leaves.
  int annotation_margin_px = 2;

  // Reproduces the irrigation fault: on day 13 treatment D reads like A.
  bool day13_anomaly = false;

  bool emit_rgb = true;
  uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument
};

// Thermal readings are clipped to this span before encoding.
constexpr double kSensorMinC = 0.0;
constexpr double kSensorMaxC = 120.0;

struct Leaf {
  double angle_rad = 0.0;
  double max_length_px = 0.0;
  double birth_day = 0.0;  // fractional; the leaf exists once birth_day <= day
  double length_jitter = 1.0;
  std::array<uint8_t, 3> color = {0, 0, 0};
};

struct PlantState {
  PlantId id;
  int day = 0;
  double center_x = 0.0;
  double center_y = 0.0;
  std::vector<Leaf> leaves;          // oldest first
  std::vector<double> budding_days;  // emergence after day 1, full horizon
};

// Plant appearance on a given day. Derived from (config.seed, plant) alone,
// so any generation order yields the same plants, and revisiting an earlier
// day yields a prefix of the same leaves.
PlantState grow_plant(const SimulatorConfig& config, const PlantId& plant,
                      int day);

// Daily air temperature, quantized to the sensor's 0.01 degree step so the
// logged value is exactly what background pixels encode.
std::vector<double> ambient_series(const SimulatorConfig& config);

// Convex hull of every leaf ellipse, pushed out by annotation_margin_px and
// rounded to integer pixel coordinates.
ContourAnnotation plant_contour(const SimulatorConfig& config,
                                const PlantState& state);

// Top view on a black background, oldest leaves painted first.
ImageU8 render_plant_rgb(const SimulatorConfig& config,
                         const PlantState& state);

// Plant pixels read ambient - leaf_cooling + treatment offset (+ one
// per-plant-day temperature draw); everything else reads ambient; sensor
// noise is added per pixel. The plant region is the rasterized contour
// eroded by the same radius the analysis uses, so with zero noise the
// analysis masks see pure leaf and pure ambient values. rng must be keyed
// per plant and day.
ImageU16 render_plant_thermal(const SimulatorConfig& config,
                              const PlantState& state, double ambient_c,
                              Rng& rng);

// Loader configuration matching a simulated dataset (default test indices).
DatasetConfig dataset_config(const SimulatorConfig& config);

// Writes the full experiment under root in the dataset layout, plus
// manifest.csv (treatment, plant, budding days) and ambient.csv. Reruns
// with the same config are byte-identical; plants carry derived seeds, so
// parallel generation writes the same bytes as sequential.
void simulate_to_directory(const SimulatorConfig& config,
                           const std::filesystem::path& root, int jobs = 1);

}  // namespace rgbt
