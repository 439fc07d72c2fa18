#include "rgbt/fusion.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "rgbt/image_io.hpp"

namespace rgbt {

DuplicationRatio duplication_ratio(int thermal_accuracy_pct,
                                   int rgb_accuracy_pct,
                                   std::vector<std::string>* warnings) {
  auto check = [](int pct, const char* which) {
    if (pct < 0 || pct > 100)
      throw std::invalid_argument(std::string("duplication_ratio: ") + which +
                                  " accuracy " + std::to_string(pct) +
                                  " outside [0, 100]");
  };
  check(thermal_accuracy_pct, "thermal");
  check(rgb_accuracy_pct, "rgb");

  int p = thermal_accuracy_pct;
  int q = rgb_accuracy_pct;
  if (p == 0) {
    p = 1;
    if (warnings)
      warnings->push_back("thermal accuracy 0% clamped to 1 for duplication");
  }
  if (q == 0) {
    q = 1;
    if (warnings)
      warnings->push_back("rgb accuracy 0% clamped to 1 for duplication");
  }
  int g = std::gcd(p, q);
  return DuplicationRatio{p / g, q / g};
}

namespace {

// nearest earlier available day for the slot, else the earliest on record
int resolve_slot(const DatasetIndex& index, const PlantId& plant, int slot,
                 Modality m, int anchor_day) {
  if (slot < 1) slot = 1;
  for (int d = slot; d >= 1; --d)
    if (index.has(plant, d, m)) return d;
  for (int d = slot + 1; d <= anchor_day; ++d)
    if (index.has(plant, d, m)) return d;
  return anchor_day;  // anchor existence is checked by the caller
}

}  // namespace

std::array<int, 3> triplet_days(const DatasetIndex& index, const PlantId& plant,
                                int day, Modality modality) {
  if (day < 1)
    throw std::invalid_argument("triplet_days: day must be positive");
  if (!index.has(plant, day, modality))
    throw std::runtime_error("triplet_days: no " +
                             std::string(modality_name(modality)) +
                             " image for " + plant_name(plant) + " day " +
                             std::to_string(day));
  return {resolve_slot(index, plant, day - 2, modality, day),
          resolve_slot(index, plant, day - 1, modality, day), day};
}

ImageU8 make_rgb_triplet(const DatasetIndex& index, const PlantId& plant,
                         int day) {
  auto days = triplet_days(index, plant, day, Modality::Rgb);
  std::array<ImageU8, 3> frames;
  for (int i = 0; i < 3; ++i)
    frames[i] = read_png_rgb8(index.at(plant, days[i], Modality::Rgb).image_path);
  return concat_horizontal({&frames[0], &frames[1], &frames[2]});
}

ImageU16 make_thermal_triplet(const DatasetIndex& index, const PlantId& plant,
                              int day) {
  auto days = triplet_days(index, plant, day, Modality::Thermal);
  std::array<ImageU16, 3> frames;
  for (int i = 0; i < 3; ++i) {
    PgmFile pgm =
        read_pgm(index.at(plant, days[i], Modality::Thermal).image_path);
    if (pgm.maxval <= 255)
      throw std::runtime_error("make_thermal_triplet: expected 16-bit raster");
    frames[i] = std::move(pgm.image);
  }
  return concat_horizontal({&frames[0], &frames[1], &frames[2]});
}

NoisyOracleClassifier::NoisyOracleClassifier(std::string name, double accuracy)
    : name_(std::move(name)), accuracy_(accuracy) {
  if (accuracy < 0.0 || accuracy > 1.0)
    throw std::invalid_argument("NoisyOracleClassifier: accuracy not in [0,1]");
}

std::vector<Treatment> NoisyOracleClassifier::classify(const DatasetIndex&,
                                                       const PlantId& plant,
                                                       int, int copies,
                                                       Rng& rng) {
  std::vector<Treatment> out;
  out.reserve(copies);
  for (int i = 0; i < copies; ++i) {
    if (rng.uniform() < accuracy_) {
      out.push_back(plant.treatment);
    } else {
      int wrong = static_cast<int>(rng.uniform_int(0, 2));
      int truth = static_cast<int>(plant.treatment);
      out.push_back(static_cast<Treatment>(wrong < truth ? wrong : wrong + 1));
    }
  }
  return out;
}

std::vector<Treatment> predict_day(DayClassifier* rgb, DayClassifier* thermal,
                                   const DatasetIndex& index,
                                   const PlantId& plant, int day,
                                   int rgb_copies, int thermal_copies,
                                   Rng& rng) {
  if (rgb_copies < 0 || thermal_copies < 0 || rgb_copies + thermal_copies < 1)
    throw std::invalid_argument("predict_day: need at least one label copy");
  if (rgb_copies > 0 && !rgb)
    throw std::invalid_argument("predict_day: rgb copies without a classifier");
  if (thermal_copies > 0 && !thermal)
    throw std::invalid_argument(
        "predict_day: thermal copies without a classifier");

  std::vector<Treatment> labels;
  labels.reserve(rgb_copies + thermal_copies);
  if (rgb_copies > 0) {
    auto part = rgb->classify(index, plant, day, rgb_copies, rng);
    labels.insert(labels.end(), part.begin(), part.end());
  }
  if (thermal_copies > 0) {
    auto part = thermal->classify(index, plant, day, thermal_copies, rng);
    labels.insert(labels.end(), part.begin(), part.end());
  }
  return labels;
}

Treatment vote(const std::vector<Treatment>& labels) {
  if (labels.empty()) throw std::invalid_argument("vote: empty label buffer");
  int counts[4] = {0, 0, 0, 0};
  for (Treatment t : labels) ++counts[static_cast<int>(t)];
  int best = 0;
  for (int t = 1; t < 4; ++t)
    if (counts[t] > counts[best]) best = t;  // ties keep the earlier class
  return static_cast<Treatment>(best);
}

Treatment predict_sequence(DayClassifier* rgb, DayClassifier* thermal,
                           const DatasetIndex& index, const PlantId& plant,
                           int day, int window, int rgb_copies,
                           int thermal_copies, Rng& rng) {
  if (window < 1)
    throw std::invalid_argument("predict_sequence: window must be positive");
  if (day < window)
    throw std::invalid_argument(
        "predict_sequence: window reaches before the first day");
  std::vector<Treatment> buffer;
  buffer.reserve(static_cast<size_t>(window) * (rgb_copies + thermal_copies));
  for (int d = day - window + 1; d <= day; ++d) {
    auto part = predict_day(rgb, thermal, index, plant, d, rgb_copies,
                            thermal_copies, rng);
    buffer.insert(buffer.end(), part.begin(), part.end());
  }
  return vote(buffer);
}

DayLabelTable sample_day_labels(const DatasetIndex& index, DayClassifier* rgb,
                                DayClassifier* thermal, int rgb_copies,
                                int thermal_copies, uint64_t seed) {
  if (rgb_copies < 0 || thermal_copies < 0 || rgb_copies + thermal_copies < 1)
    throw std::invalid_argument("sample_day_labels: need at least one copy");

  DayLabelTable table;
  table.days = index.config.days;
  table.rgb_copies = rgb_copies;
  table.thermal_copies = thermal_copies;

  std::vector<PlantId> plants = index.plants();
  if (plants.empty())
    throw std::runtime_error("sample_day_labels: no plants in index");

  for (const PlantId& plant : plants) {
    auto& rows = table.labels[plant];
    rows.resize(table.days);
    for (int day = 1; day <= table.days; ++day) {
      Rng rng(mix_seed(mix_seed(seed, plant_seed_tag(plant)),
                       static_cast<uint64_t>(day)));
      rows[day - 1] = predict_day(rgb, thermal, index, plant, day, rgb_copies,
                                  thermal_copies, rng);
    }
  }
  return table;
}

namespace {

RollingResult rolling_impl(const DayLabelTable& table, int window,
                           bool binary) {
  if (window < 1 || window > table.days)
    throw std::invalid_argument("rolling_accuracy: window outside 1.." +
                                std::to_string(table.days));
  RollingResult result;
  std::vector<Treatment> buffer;
  for (const auto& [plant, rows] : table.labels) {
    for (int end = window; end <= table.days; ++end) {
      buffer.clear();
      for (int d = end - window + 1; d <= end; ++d)
        buffer.insert(buffer.end(), rows[d - 1].begin(), rows[d - 1].end());
      Treatment predicted = vote(buffer);
      bool ok;
      if (binary) {
        ok = (predicted == Treatment::A) == (plant.treatment == Treatment::A);
      } else {
        ok = predicted == plant.treatment;
      }
      ++result.windows;
      if (ok) ++result.correct;
    }
  }
  if (result.windows == 0)
    throw std::runtime_error("rolling_accuracy: no windows evaluated");
  result.accuracy =
      static_cast<double>(result.correct) / static_cast<double>(result.windows);
  return result;
}

}  // namespace

RollingResult rolling_accuracy(const DayLabelTable& table, int window) {
  return rolling_impl(table, window, false);
}

RollingResult binary_rolling_accuracy(const DayLabelTable& table, int window) {
  return rolling_impl(table, window, true);
}

std::vector<PerDayRow> per_day_accuracy(const DayLabelTable& table) {
  std::vector<PerDayRow> rows(table.days);
  std::vector<Treatment> buffer;
  for (int day = 1; day <= table.days; ++day) {
    PerDayRow& row = rows[day - 1];
    row.day = day;
    int64_t correct[4] = {0, 0, 0, 0};
    int64_t total[4] = {0, 0, 0, 0};
    for (const auto& [plant, day_rows] : table.labels) {
      buffer.clear();
      for (int d = 1; d <= day; ++d)
        buffer.insert(buffer.end(), day_rows[d - 1].begin(),
                      day_rows[d - 1].end());
      int cls = static_cast<int>(plant.treatment);
      ++total[cls];
      if (vote(buffer) == plant.treatment) ++correct[cls];
    }
    double sum = 0.0;
    for (int t = 0; t < 4; ++t) {
      if (total[t] == 0)
        throw std::runtime_error("per_day_accuracy: no plants for treatment " +
                                 std::string(1, treatment_letter(
                                                    static_cast<Treatment>(t))));
      row.class_accuracy[t] =
          static_cast<double>(correct[t]) / static_cast<double>(total[t]);
      sum += row.class_accuracy[t];
    }
    row.mean = sum / 4.0;
  }
  return rows;
}

double single_frame_accuracy(DayClassifier& classifier,
                             const DatasetIndex& index, uint64_t seed) {
  std::vector<PlantId> plants = index.plants();
  if (plants.empty())
    throw std::runtime_error("single_frame_accuracy: no plants in index");
  int64_t correct = 0, total = 0;
  for (const PlantId& plant : plants) {
    for (int day = 1; day <= index.config.days; ++day) {
      Rng rng(mix_seed(mix_seed(seed, plant_seed_tag(plant)),
                       static_cast<uint64_t>(day)));
      auto labels = classifier.classify(index, plant, day, 1, rng);
      ++total;
      if (labels.at(0) == plant.treatment) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace rgbt
