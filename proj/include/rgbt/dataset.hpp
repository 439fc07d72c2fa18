#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rgbt/image.hpp"

namespace rgbt {

// Irrigation treatments, best watered first. Ordering matters: every
// tie-break in the project resolves toward the less stressed class.
enum class Treatment { A = 0, B = 1, C = 2, D = 3 };

constexpr std::array<Treatment, 4> kAllTreatments = {
    Treatment::A, Treatment::B, Treatment::C, Treatment::D};

char treatment_letter(Treatment t);
Treatment treatment_from_letter(char c);
double irrigation_fraction(Treatment t);  // A=1.0, B=0.8, C=0.6, D=0.4

enum class Modality { Rgb = 0, Thermal = 1 };

const char* modality_name(Modality m);  // "rgb" / "thermal"

struct PlantId {
  Treatment treatment = Treatment::A;
  int index = 0;  // 1-based within the treatment

  auto operator<=>(const PlantId&) const = default;
};

std::string plant_name(const PlantId& p);  // e.g. "A/05"

// Stable numeric tag for deriving per-plant random streams.
uint64_t plant_seed_tag(const PlantId& p);

// Native thermal sensor raster; RGB frames are downscaled to match.
constexpr int kNativeWidth = 384;
constexpr int kNativeHeight = 288;

// Closed polygon outlining one plant, integer pixel coordinates.
struct ContourAnnotation {
  std::vector<std::array<int, 2>> points;
};

ContourAnnotation load_contour(const std::filesystem::path& path);
void save_contour(const std::filesystem::path& path,
                  const ContourAnnotation& contour);

// Fills the polygon under the even-odd rule, deciding each pixel by its
// center (x+0.5, y+0.5). Rejects polygons with fewer than 3 points or with
// all points collinear.
Mask rasterize_contour(const ContourAnnotation& contour, int width,
                       int height);

// Raw sensor counts are hundredths of a degree Celsius, exactly.
TemperatureGrid decode_thermal(const ImageU16& raw);
TemperatureGrid decode_thermal(const ImageU16& raw, int expected_width,
                               int expected_height);

struct DatasetConfig {
  int plants_per_treatment = 30;
  int days = 17;
  std::vector<int> test_indices = {5, 10, 15, 20};
};

struct RecordKey {
  PlantId plant;
  int day = 0;
  Modality modality = Modality::Rgb;

  auto operator<=>(const RecordKey&) const = default;
};

struct ImageRecord {
  std::filesystem::path image_path;
  std::filesystem::path contour_path;  // empty when the sidecar is absent
};

struct DatasetIndex {
  std::filesystem::path root;
  DatasetConfig config;
  std::map<RecordKey, ImageRecord> records;
  std::vector<std::string> warnings;

  bool has(const PlantId& plant, int day, Modality m) const;
  const ImageRecord& at(const PlantId& plant, int day, Modality m) const;
  std::vector<PlantId> plants() const;  // sorted, deduplicated
};

// Expected layout: <root>/<A..D>/<plant>/<day>.rgb.png,
// <day>.thermal.pgm, plus <day>.<modality>.contour.json sidecars.
// Files present on disk are cataloged; expected-but-missing files become
// warnings rather than silent holes.
DatasetIndex load_dataset_index(const std::filesystem::path& root,
                                const DatasetConfig& config);

// Partitions by plant index, identically across treatments.
struct DatasetSplit {
  DatasetIndex train;
  DatasetIndex test;
};

DatasetSplit split_train_test(const DatasetIndex& index,
                              const std::vector<int>& test_indices);

// Canonical file names inside a plant directory.
std::string image_file_name(int day, Modality m);
std::string contour_file_name(int day, Modality m);
std::filesystem::path plant_directory(const std::filesystem::path& root,
                                      const PlantId& plant);

}  // namespace rgbt
