#include "rgbt/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

#include "rgbt/image_io.hpp"

namespace rgbt {

namespace {

Mask record_mask(const ImageRecord& rec, int width, int height,
                 const PlantId& plant, int day) {
  if (rec.contour_path.empty())
    throw std::runtime_error("no contour annotation for " + plant_name(plant) +
                             " day " + std::to_string(day));
  return rasterize_contour(load_contour(rec.contour_path), width, height);
}

Tensor grid_to_tensor(const TemperatureGrid& g) {
  Tensor t = Tensor::zeros({g.height, g.width, 1});
  std::copy(g.celsius.begin(), g.celsius.end(), t.data.begin());
  return t;
}

TemperatureGrid maybe_downscale(TemperatureGrid g, const PreprocessOptions& o) {
  if (g.width == o.target_width && g.height == o.target_height) return g;
  return downscale(g, o.target_width, o.target_height);
}

}  // namespace

PreprocessOptions input_scale(const std::string& name) {
  PreprocessOptions opts;
  if (name == "native") return opts;
  if (name == "quarter") {
    opts.target_width = kNativeWidth / 4;
    opts.target_height = kNativeHeight / 4;
    return opts;
  }
  throw std::invalid_argument("unknown input scale: " + name +
                              " (expected native or quarter)");
}

std::string input_kind_name(const InputKind& kind) {
  return std::string(kind.triplet ? "triplet-" : "single-") +
         modality_name(kind.modality);
}

Tensor rgb_model_input(const DatasetIndex& index, const PlantId& plant,
                       int day, const PreprocessOptions& opts) {
  const ImageRecord& rec = index.at(plant, day, Modality::Rgb);
  ImageU8 img = read_png_rgb8(rec.image_path);
  Mask mask = record_mask(rec, img.width, img.height, plant, day);

  std::array<TemperatureGrid, 3> planes;
  for (int c = 0; c < 3; ++c) {
    TemperatureGrid plane = TemperatureGrid::zeros(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        if (mask.get(x, y)) plane.at(x, y) = img.at(x, y, c) / 255.0;
    planes[c] = maybe_downscale(std::move(plane), opts);
  }

  Tensor out = Tensor::zeros({opts.target_height, opts.target_width, 3});
  for (int y = 0; y < opts.target_height; ++y)
    for (int x = 0; x < opts.target_width; ++x)
      for (int c = 0; c < 3; ++c) out(y, x, c) = planes[c].at(x, y);
  return out;
}

Tensor thermal_model_input(const DatasetIndex& index, const PlantId& plant,
                           int day, const PreprocessOptions& opts) {
  const ImageRecord& rec = index.at(plant, day, Modality::Thermal);
  PgmFile pgm = read_pgm(rec.image_path);
  if (pgm.maxval <= 255)
    throw std::runtime_error("thermal raster is not 16-bit: " +
                             rec.image_path.string());
  TemperatureGrid grid = decode_thermal(pgm.image);
  Mask mask = record_mask(rec, grid.width, grid.height, plant, day);
  Mask region = erode(mask, opts.erosion_radius);

  TemperatureGrid norm = TemperatureGrid::zeros(grid.width, grid.height);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (!region.get(x, y)) continue;
      double v = (grid.at(x, y) - kThermalNormLowC) / kThermalNormSpanC;
      norm.at(x, y) = std::clamp(v, 0.0, 1.0);
    }
  }
  return grid_to_tensor(maybe_downscale(std::move(norm), opts));
}

namespace {

Tensor triplet_input(const DatasetIndex& index, const PlantId& plant, int day,
                     Modality modality, const PreprocessOptions& opts) {
  auto days = triplet_days(index, plant, day, modality);
  std::array<Tensor, 3> slots;
  for (int i = 0; i < 3; ++i)
    slots[i] = modality == Modality::Rgb
                   ? rgb_model_input(index, plant, days[i], opts)
                   : thermal_model_input(index, plant, days[i], opts);
  return concat_width({&slots[0], &slots[1], &slots[2]});
}

}  // namespace

Tensor rgb_triplet_input(const DatasetIndex& index, const PlantId& plant,
                         int day, const PreprocessOptions& opts) {
  return triplet_input(index, plant, day, Modality::Rgb, opts);
}

Tensor thermal_triplet_input(const DatasetIndex& index, const PlantId& plant,
                             int day, const PreprocessOptions& opts) {
  return triplet_input(index, plant, day, Modality::Thermal, opts);
}

Tensor model_input(const DatasetIndex& index, const PlantId& plant, int day,
                   const InputKind& kind, const PreprocessOptions& opts) {
  if (kind.triplet) return triplet_input(index, plant, day, kind.modality, opts);
  return kind.modality == Modality::Rgb
             ? rgb_model_input(index, plant, day, opts)
             : thermal_model_input(index, plant, day, opts);
}

TrainingSet collect_training_set(const DatasetIndex& index,
                                 const InputKind& kind,
                                 const PreprocessOptions& opts) {
  TrainingSet set;
  for (const PlantId& plant : index.plants()) {
    for (int day = 1; day <= index.config.days; ++day) {
      if (!index.has(plant, day, kind.modality)) continue;
      set.images.push_back(model_input(index, plant, day, kind, opts));
      set.labels.push_back(static_cast<int>(plant.treatment));
    }
  }
  if (set.images.empty())
    throw std::runtime_error("collect_training_set: no usable records");
  return set;
}

CnnDayClassifier::CnnDayClassifier(std::string name, Network* net,
                                   InputKind kind, PreprocessOptions opts,
                                   bool stochastic)
    : name_(std::move(name)),
      net_(net),
      kind_(kind),
      opts_(opts),
      stochastic_(stochastic) {
  if (!net_) throw std::invalid_argument("CnnDayClassifier: null network");
}

std::vector<Treatment> CnnDayClassifier::classify(const DatasetIndex& index,
                                                  const PlantId& plant,
                                                  int day, int copies,
                                                  Rng& rng) {
  if (copies < 1)
    throw std::invalid_argument("CnnDayClassifier: copies must be positive");
  Tensor input = model_input(index, plant, day, kind_, opts_);
  Tensor batch = stack({&input});

  auto argmax_row = [&](const Tensor& probs) {
    int best = 0;
    for (int c = 1; c < probs.dim(1); ++c)
      if (probs(0, c) > probs(0, best)) best = c;
    return static_cast<Treatment>(best);
  };

  std::vector<Treatment> out;
  out.reserve(copies);
  if (!stochastic_) {
    Treatment label = argmax_row(net_->forward(batch, Pass::Infer, nullptr));
    out.assign(copies, label);
    return out;
  }
  for (int i = 0; i < copies; ++i)
    out.push_back(argmax_row(net_->forward(batch, Pass::InferStochastic, &rng)));
  return out;
}

}  // namespace rgbt
