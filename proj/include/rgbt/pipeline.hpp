#pragma once

#include <string>
#include <vector>

#include "rgbt/dataset.hpp"
#include "rgbt/fusion.hpp"
#include "rgbt/imaging.hpp"
#include "rgbt/network.hpp"
#include "rgbt/tensor.hpp"

namespace rgbt {

// Thermal values map to [0,1] across the span a greenhouse plausibly
// reaches; colors divide by 255.
constexpr double kThermalNormLowC = 20.0;
constexpr double kThermalNormSpanC = 30.0;

// Frames are masked at source resolution, then box-downscaled here.
struct PreprocessOptions {
  int erosion_radius = kDefaultErosionRadius;  // thermal region shave
  int target_width = kNativeWidth;
  int target_height = kNativeHeight;
};

// "native" keeps the sensor raster; "quarter" (96x72) is cheap enough for a
// desk run.
PreprocessOptions input_scale(const std::string& name);

// Which tensor a model consumes.
struct InputKind {
  Modality modality = Modality::Thermal;
  bool triplet = false;  // three-day strip instead of one frame
};

std::string input_kind_name(const InputKind& kind);

// RGB: background (outside the annotated contour) zeroed. H x W x 3.
Tensor rgb_model_input(const DatasetIndex& index, const PlantId& plant,
                       int day, const PreprocessOptions& opts);

// Thermal: everything outside the eroded contour zeroed. H x W x 1.
Tensor thermal_model_input(const DatasetIndex& index, const PlantId& plant,
                           int day, const PreprocessOptions& opts);

// [day-2 | day-1 | day], each slot preprocessed like the single-frame
// inputs, concatenated to H x 3W x C. Early or missing days fall back per
// triplet_days.
Tensor rgb_triplet_input(const DatasetIndex& index, const PlantId& plant,
                         int day, const PreprocessOptions& opts);
Tensor thermal_triplet_input(const DatasetIndex& index, const PlantId& plant,
                             int day, const PreprocessOptions& opts);

Tensor model_input(const DatasetIndex& index, const PlantId& plant, int day,
                   const InputKind& kind, const PreprocessOptions& opts);

struct TrainingSet {
  std::vector<Tensor> images;
  std::vector<int> labels;  // treatment indices
};

// Every (plant, day) of the index that has the needed modality.
TrainingSet collect_training_set(const DatasetIndex& index,
                                 const InputKind& kind,
                                 const PreprocessOptions& opts);

// Day labels from a trained network. Deterministic mode repeats one
// plain-inference argmax; stochastic mode keeps dropout live and samples
// each copy independently.
class CnnDayClassifier : public DayClassifier {
 public:
  CnnDayClassifier(std::string name, Network* net, InputKind kind,
                   PreprocessOptions opts, bool stochastic);

  std::string name() const override { return name_; }
  std::vector<Treatment> classify(const DatasetIndex& index,
                                  const PlantId& plant, int day, int copies,
                                  Rng& rng) override;

 private:
  std::string name_;
  Network* net_;
  InputKind kind_;
  PreprocessOptions opts_;
  bool stochastic_;
};

}  // namespace rgbt
