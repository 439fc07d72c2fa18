#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rgbt/common.hpp"
#include "rgbt/dataset.hpp"

namespace rgbt {

// How many label copies each modality contributes per day. Derived from the
// two models' accuracies so the better model gets proportionally more votes.
struct DuplicationRatio {
  int thermal_copies = 1;
  int rgb_copies = 1;
};

// Accuracies are integer percentages in [0, 100]. A zero accuracy is clamped
// to 1 (with a warning) so the ratio stays defined; the pair is reduced by
// their gcd, e.g. (60, 90) -> 2 thermal : 3 rgb.
DuplicationRatio duplication_ratio(int thermal_accuracy_pct,
                                   int rgb_accuracy_pct,
                                   std::vector<std::string>* warnings = nullptr);

// Day slots feeding a three-day strip for (plant, day): {day-2, day-1, day},
// clamped at the first day; a slot whose image is absent falls back to the
// nearest earlier available day, or the earliest one on record.
std::array<int, 3> triplet_days(const DatasetIndex& index, const PlantId& plant,
                                int day, Modality modality);

// Side-by-side concatenation [day-2 | day-1 | day] of the stored rasters.
ImageU8 make_rgb_triplet(const DatasetIndex& index, const PlantId& plant,
                         int day);
ImageU16 make_thermal_triplet(const DatasetIndex& index, const PlantId& plant,
                              int day);

// Per-day label source. Stochastic sources sample each copy independently;
// deterministic ones repeat a single prediction.
class DayClassifier {
 public:
  virtual ~DayClassifier() = default;
  virtual std::string name() const = 0;
  virtual std::vector<Treatment> classify(const DatasetIndex& index,
                                          const PlantId& plant, int day,
                                          int copies, Rng& rng) = 0;
};

// Fixed-behaviour source for tests and calibration: predicts the true
// treatment with the given probability, otherwise errs to a uniformly drawn
// wrong class.
class NoisyOracleClassifier : public DayClassifier {
 public:
  NoisyOracleClassifier(std::string name, double accuracy);
  std::string name() const override { return name_; }
  std::vector<Treatment> classify(const DatasetIndex&, const PlantId& plant,
                                  int, int copies, Rng& rng) override;

 private:
  std::string name_;
  double accuracy_;
};

// One day's worth of fused labels: rgb copies first, then thermal copies.
std::vector<Treatment> predict_day(DayClassifier* rgb, DayClassifier* thermal,
                                   const DatasetIndex& index,
                                   const PlantId& plant, int day,
                                   int rgb_copies, int thermal_copies,
                                   Rng& rng);

// Most frequent label; count ties resolve toward the less stressed class.
Treatment vote(const std::vector<Treatment>& labels);

// Flattens the last `window` days ending at `day` into one label buffer and
// votes. Buffer length is window * (rgb_copies + thermal_copies).
Treatment predict_sequence(DayClassifier* rgb, DayClassifier* thermal,
                           const DatasetIndex& index, const PlantId& plant,
                           int day, int window, int rgb_copies,
                           int thermal_copies, Rng& rng);

// Labels sampled once per plant-day and reused across overlapping windows.
struct DayLabelTable {
  int days = 0;
  int rgb_copies = 0;
  int thermal_copies = 0;
  // per plant, indexed by day-1; each entry already fused rgb-then-thermal
  std::map<PlantId, std::vector<std::vector<Treatment>>> labels;
};

// Requires every listed plant to have all days for the modalities in use.
// Sampling is keyed on (seed, plant, day) so results are independent of
// evaluation order.
DayLabelTable sample_day_labels(const DatasetIndex& index,
                                DayClassifier* rgb, DayClassifier* thermal,
                                int rgb_copies, int thermal_copies,
                                uint64_t seed);

struct RollingResult {
  int64_t windows = 0;
  int64_t correct = 0;
  double accuracy = 0.0;
};

// All contiguous windows of length N per plant (days - N + 1 of them).
RollingResult rolling_accuracy(const DayLabelTable& table, int window);

// Same windows, scored after collapsing to fully-irrigated vs not.
RollingResult binary_rolling_accuracy(const DayLabelTable& table, int window);

// Growing prefix windows: the day-n prediction uses days 1..n.
struct PerDayRow {
  int day = 0;
  std::array<double, 4> class_accuracy = {0, 0, 0, 0};
  double mean = 0.0;
};

std::vector<PerDayRow> per_day_accuracy(const DayLabelTable& table);

// Deterministic single-frame accuracy of one classifier over every
// (plant, day) it can serve; used to calibrate duplication ratios.
double single_frame_accuracy(DayClassifier& classifier,
                             const DatasetIndex& index, uint64_t seed);

}  // namespace rgbt
